import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import BETA, GAMMA, KAPPA, WA
from fockbic.coupling import Constant
from fockbic.design import (
    ClassifyThresholds,
    DesignPoint,
    Regime,
    classify,
    detuning_for_fock,
    loss_contrast,
    loss_curve,
    stable_photon_number,
)
from fockbic.errors import ConfigError

C2 = KAPPA / GAMMA**2


def point(delta0_over_wa, kappa_i_over_wa=0.0, beta=BETA):
    return DesignPoint(WA, beta, delta0_over_wa * WA, kappa_i_over_wa * WA, C2)


def test_zero_detuning_gives_one_photon():
    assert stable_photon_number(point(0.0)) == 1.0
    assert detuning_for_fock(1, WA, BETA) == 0.0


def test_tenth_fock_detuning():
    assert stable_photon_number(point(9e-5)) == pytest.approx(10, rel=1e-12)
    assert detuning_for_fock(10, WA, BETA) / WA == pytest.approx(9e-5, rel=1e-12)


def test_loss_curve_figure_detuning():
    # 0.043 gamma with gamma = 1e-2 omega_a
    assert stable_photon_number(point(0.043 * 1e-2)) == pytest.approx(44, rel=1e-12)


@given(st.integers(1, 10_000), st.floats(1e-9, 1e-3))
def test_round_trip(n, beta):
    p = DesignPoint(WA, beta, detuning_for_fock(n, WA, beta), 0.0, C2)
    assert stable_photon_number(p) == pytest.approx(n, rel=1e-12)


@given(st.floats(0, 1e-2), st.floats(0, 1e-2), st.floats(1e-8, 1e-4))
def test_monotone(d1, d2, beta):
    if abs(d1 - d2) < 1e-9:
        return
    lo, hi = sorted((d1, d2))
    assert stable_photon_number(point(lo, beta=beta)) < stable_photon_number(point(hi, beta=beta))
    if lo > 1e-9:
        assert stable_photon_number(point(lo, beta=beta)) > stable_photon_number(point(lo, beta=beta * 1.5))


def test_needs_kerr():
    with pytest.raises(ConfigError):
        stable_photon_number(point(1e-4, beta=0.0))
    with pytest.raises(ConfigError):
        detuning_for_fock(3, WA, 0.0)
    with pytest.raises(ValueError):
        detuning_for_fock(0, WA, BETA)


def test_loss_curve_minimum():
    c = loss_curve(point(9e-5), n_max=60)
    assert c.argmin == 10 and c.min == 0.0
    c = loss_curve(point(9e-5, 1e-7), n_max=60)
    assert c.min == pytest.approx(1e-7 * WA, rel=1e-12)
    flat = loss_curve(point(9e-5), Constant(2e-3), n_max=20)
    assert np.all(flat.kappa == flat.kappa[0])
    with pytest.raises(ValueError):
        loss_curve(point(0), n_max=0)


def test_classify():
    assert classify(point(9e-5)) is Regime.FOCK_CAPABLE
    assert classify(point(9e-5, 1e-7)) is Regime.FOCK_CAPABLE
    assert classify(point(9.5e-5)) is Regime.FAILED_FOCK  # n0 = 10.5
    assert classify(point(9e-5, 1e-3)) is Regime.WASHED_OUT
    assert classify(point(9e-5), Constant(1e-3)) is Regime.WASHED_OUT
    assert classify(point(-1e-4)) is Regime.WASHED_OUT
    strict = ClassifyThresholds(contrast=1e6)
    assert classify(point(9e-5, 1e-7), thresholds=strict) is Regime.WASHED_OUT


def test_contrast_with_background_loss():
    # max over n = 1..50 is at n = 50; min is the background
    expected = (1e-7 * WA + C2 * (2 * BETA * WA * 40) ** 2) / (1e-7 * WA)
    assert loss_contrast(point(9e-5, 1e-7)) == pytest.approx(expected, rel=1e-9)

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm
from scipy.special import jv

from fockbic.errors import TruncationError
from fockbic.fockspace import DensityMatrix, coherent_state, fock_state, poisson_state
from fockbic.pinem import discriminate, pinem_spectrum


def dense_spectrum(rho, g, k_max):
    """Exponentiate the full cavity x electron generator and trace out the cavity."""
    dim = rho.shape[0]
    pad = dim + k_max + 1
    ne = 2 * k_max + 1
    a = np.diag(np.sqrt(np.arange(1, pad)), 1)
    b = np.diag(np.ones(ne - 1), 1)  # b|k> = |k-1>, index = k + k_max
    gen = g * np.kron(a, b.T) - np.conj(g) * np.kron(a.T, b)
    s = expm(gen)
    r = np.zeros((pad, pad), complex)
    r[:dim, :dim] = rho
    e0 = np.zeros(ne)
    e0[k_max] = 1
    psi0 = np.kron(r, np.outer(e0, e0))
    out = s @ psi0 @ s.conj().T
    return np.einsum("nknj->kj", out.reshape(pad, ne, pad, ne)).diagonal().real


@pytest.mark.parametrize("g", [0.05, 0.3, 0.2 + 0.15j])
def test_matches_dense_oracle(g, rng):
    dim, k_max = 8, 12
    v = rng.normal(size=(dim, 2)) + 1j * rng.normal(size=(dim, 2))
    rho = v @ v.conj().T
    rho /= np.trace(rho).real
    fast = pinem_spectrum(DensityMatrix(rho), g, k_max)
    assert np.allclose(fast.probabilities, dense_spectrum(rho, g, k_max), atol=1e-12)


def test_fock_gain_is_bounded():
    s = pinem_spectrum(fock_state(10, 11), 0.4, 40)
    assert np.all(s.probabilities[s.k > 10] == 0.0)
    assert s.total == pytest.approx(1, abs=1e-12)


def test_vacuum_gives_gainless_spectrum():
    s = pinem_spectrum(fock_state(0, 3), 0.5, 20)
    assert np.all(s.probabilities[s.k > 0] == 0.0)
    # emission into vacuum: Poisson in |g|^2
    k = np.arange(0, 6)
    poisson = np.exp(-0.25) * 0.25**k / np.cumprod(np.r_[1, np.arange(1, 6)])
    assert np.allclose([s.at(-int(i)) for i in k], poisson, atol=1e-14)


def test_coherent_tends_to_bessel():
    n = 100
    s = pinem_spectrum(coherent_state(n, 0, 179), 0.1, 40)
    bessel = jv(s.k, 2 * 0.1 * np.sqrt(n)) ** 2
    peaks = [k for k in range(-3, 4) if bessel[k + 40] > 0.01]
    assert len(peaks) == 7
    for k in (-1, 1):
        assert s.at(k) == pytest.approx(bessel[k + 40], rel=0.01)


@given(st.floats(0, 2 * np.pi))
@settings(max_examples=10, deadline=None)
def test_insensitive_to_coupling_phase(phase):
    rho = coherent_state(4, 0.7, 25)
    a = pinem_spectrum(rho, 0.3, 25)
    b = pinem_spectrum(rho, 0.3 * np.exp(1j * phase), 25)
    assert np.allclose(a.probabilities, b.probabilities, atol=1e-14)


@given(st.integers(0, 30), st.floats(0.01, 0.3))
@settings(max_examples=20, deadline=None)
def test_unitarity(m, g):
    s = pinem_spectrum(fock_state(m, 31), g, 40)
    assert s.total == pytest.approx(1, abs=1e-10)
    assert np.all(s.probabilities >= -1e-15)


def test_weak_coupling_limit():
    s = pinem_spectrum(poisson_state(2, 30), 1e-6, 5)
    assert s.at(0) == pytest.approx(1, abs=1e-10)


def test_truncation_error_names_the_ladder():
    with pytest.raises(TruncationError) as err:
        pinem_spectrum(coherent_state(30, 0, 75), 0.7, 5)
    assert "k_max" in str(err.value)
    needed = (err.value.required_dim - 1) // 2
    assert pinem_spectrum(coherent_state(30, 0, 75), 0.7, needed).total == pytest.approx(1, abs=1e-9)
    with pytest.raises(ValueError):
        pinem_spectrum(fock_state(1, 3), 0.1, 0)


def test_discriminates_fock_from_coherent():
    def distance(g):
        return discriminate(pinem_spectrum(fock_state(20, 55), g, 40),
                            pinem_spectrum(coherent_state(20, 0, 55), g, 40))

    d = [distance(g) for g in (0.2, 0.5, 1.0, 1.5)]
    assert np.all(np.diff(d) > 0) and d[0] > 0.01 and d[-1] > 0.2
    fock = pinem_spectrum(fock_state(20, 55), 0.2, 30)
    assert discriminate(fock, fock) == 0.0
    with pytest.raises(ValueError):
        discriminate(fock, pinem_spectrum(fock_state(20, 55), 0.2, 31))

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import poisson

from fockbic.errors import DimensionError, TruncationError
from fockbic.fockspace import (
    DensityMatrix,
    coherent_state,
    fock_state,
    ladder_apply,
    lowering_operator,
    poisson_state,
    truncation_dim,
    validate,
)
from fockbic.observables import g2_zero, mean_var


def test_fock_state_projectors():
    assert np.array_equal(fock_state(0, 4).matrix, np.diag([1, 0, 0, 0]).astype(complex))
    assert np.array_equal(fock_state(3, 4).matrix, np.diag([0, 0, 0, 1]).astype(complex))
    with pytest.raises(DimensionError):
        fock_state(5, 4)
    with pytest.raises(DimensionError):
        fock_state(4, 4)


def test_density_matrix_is_read_only():
    rho = fock_state(1, 3)
    with pytest.raises(ValueError):
        rho.matrix[0, 0] = 1


# smallest N with Poisson tail below tol, from a 40-digit direct tail sum (mpmath)
@pytest.mark.parametrize(
    "mean,tol,expected",
    [(0, 1e-10, 1), (50, 1e-10, 102), (10, 1e-6, 29), (5, 1e-10, 26), (100, 1e-12, 179), (0.5, 1e-3, 5)],
)
def test_truncation_dim_matches_tail_sum(mean, tol, expected):
    assert truncation_dim(mean, tol) == expected


@given(st.floats(0.01, 300), st.sampled_from([1e-4, 1e-8, 1e-12]))
@settings(max_examples=60, deadline=None)
def test_truncation_dim_is_minimal(mean, tol):
    n = truncation_dim(mean, tol)
    assert poisson.sf(n - 1, mean) < tol
    if n > 1:
        assert poisson.sf(n - 2, mean) >= tol


def test_coherent_vacuum_and_moments():
    assert np.allclose(coherent_state(0, 0, 8).matrix, fock_state(0, 8).matrix)
    rho = coherent_state(5, 0, 64)
    assert abs(rho.trace() - 1) < 1e-10
    mean, var = mean_var(rho)
    assert abs(mean - 5) < 1e-8 and abs(var - 5) < 1e-8


def test_coherent_truncation_error_reports_dim():
    need = truncation_dim(50, 1e-10)
    with pytest.raises(TruncationError) as exc:
        coherent_state(50, 0, need - 1)
    assert exc.value.required_dim == need
    coherent_state(50, 0, need)


@given(st.floats(0.1, 120), st.floats(-np.pi, np.pi))
@settings(max_examples=40, deadline=None)
def test_coherent_diagonal_is_poisson(mean, phase):
    dim = truncation_dim(mean, 1e-12)
    rho = coherent_state(mean, phase, dim, tail_tol=1e-12)
    assert np.max(np.abs(rho.diagonal() - poisson.pmf(np.arange(dim), mean))) < 1e-12


def test_coherent_offdiagonal_phase():
    rho = coherent_state(2.0, 0.7, 20).matrix
    alpha = np.sqrt(2.0) * np.exp(0.7j)
    # rho_{10} = e^{-|a|^2} alpha ; rho_{21} = e^{-|a|^2} alpha^2 alpha* / sqrt(2)
    assert np.isclose(rho[1, 0], np.exp(-2) * alpha, atol=1e-15)
    assert np.isclose(rho[2, 1], np.exp(-2) * alpha**2 * np.conj(alpha) / np.sqrt(2), atol=1e-15)


def test_large_coherent_state_no_overflow():
    rho = coherent_state(400, 0, truncation_dim(400, 1e-10))
    assert np.all(np.isfinite(rho.matrix))
    assert abs(rho.trace() - 1) < 1e-9


def test_poisson_state_is_diagonal():
    rho = poisson_state(7, 40)
    assert np.count_nonzero(rho.matrix - np.diag(np.diag(rho.matrix))) == 0
    assert np.allclose(rho.diagonal(), poisson.pmf(np.arange(40), 7), atol=1e-15)


def test_ladder_matrix_elements():
    a = lowering_operator(7)
    for m in range(7):
        for n in range(7):
            assert a[m, n] == (np.sqrt(n) if m == n - 1 else 0.0)


def test_ladder_apply_examples():
    assert np.allclose(ladder_apply("number", fock_state(3, 6)), 3 * fock_state(3, 6).matrix)
    assert not np.any(ladder_apply("lower", fock_state(0, 6)))
    rho = coherent_state(5, 0.3, 64)
    assert abs(np.trace(ladder_apply("number", rho)) - 5) < 1e-8
    # raising the top level leaves the basis (absorbing boundary)
    assert not np.any(ladder_apply("raise", fock_state(5, 6)))
    with pytest.raises(ValueError):
        ladder_apply("sideways", rho)


def test_validate_examples():
    d = validate(coherent_state(5, 1.0, 40))
    assert d.hermiticity_defect < 1e-10 and d.trace_defect < 1e-10 and d.negativity < 1e-10
    assert d.ok()

    m = np.array([[0.5, 0.2 + 0.1j], [0.3, 0.5]])
    assert np.isclose(validate(m).hermiticity_defect, abs(m[0, 1] - np.conj(m[1, 0])))

    d = validate(np.diag([0.5, 0.6]))
    assert np.isclose(d.trace_defect, 0.1)
    assert not d.ok()


def test_validate_negative_eigenvalue_and_gershgorin():
    m = np.array([[0.5, 0.6], [0.6, 0.5]])
    d = validate(m)
    assert d.eigenvalue_method == "exact"
    assert np.isclose(d.min_eigenvalue, -0.1)
    big = validate(fock_state(2, 300))
    assert big.eigenvalue_method == "gershgorin"
    assert big.min_eigenvalue <= 0.0  # conservative bound


def test_from_diagonal_and_padding():
    rho = DensityMatrix.from_diagonal([0.25, 0.75])
    assert rho.dim == 2
    p = rho.padded(5)
    assert p.dim == 5 and np.allclose(p.diagonal(), [0.25, 0.75, 0, 0, 0])


@pytest.mark.parametrize("n", [1, 2, 5, 10, 37])
def test_fock_statistics(n):
    rho = fock_state(n, 40)
    assert mean_var(rho) == (n, 0.0)
    assert g2_zero(rho) == pytest.approx(1 - 1 / n, abs=1e-15)

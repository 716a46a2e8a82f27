"""Truncated Fock-basis states, ladder operators and state diagnostics.

The basis is ``|0>, ..., |dim-1>``.  Raising ``|dim-1>`` leaves the basis
and the amplitude is dropped (absorbing top boundary).
"""

from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy.special import gammaln
from scipy.stats import poisson

from .errors import DimensionError, TruncationError

# eigenvalue-based positivity check up to this size, Gershgorin above
EXACT_EIG_MAX_DIM = 256


class DensityMatrix:
    """Immutable complex matrix on a truncated Fock basis.

    Construction does not enforce the density-matrix invariants so that
    defective matrices can still be inspected with :func:`validate`.
    """

    __slots__ = ("_rho",)

    def __init__(self, entries):
        rho = np.array(entries, dtype=complex)
        if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
            raise DimensionError(f"density matrix must be square, got shape {rho.shape}")
        if rho.shape[0] < 1:
            raise DimensionError("density matrix needs dim >= 1")
        rho.flags.writeable = False
        self._rho = rho

    @property
    def matrix(self) -> np.ndarray:
        """Read-only view of the entries."""
        return self._rho

    @property
    def dim(self) -> int:
        return self._rho.shape[0]

    def diagonal(self) -> np.ndarray:
        return self._rho.diagonal().real.copy()

    def trace(self) -> complex:
        return complex(np.trace(self._rho))

    def padded(self, dim: int) -> "DensityMatrix":
        """Embed into a larger basis with zeros in the new rows/columns."""
        if dim < self.dim:
            raise DimensionError(f"cannot pad dim {self.dim} down to {dim}")
        out = np.zeros((dim, dim), dtype=complex)
        out[: self.dim, : self.dim] = self._rho
        return DensityMatrix(out)

    @classmethod
    def from_diagonal(cls, probs) -> "DensityMatrix":
        return cls(np.diag(np.asarray(probs, dtype=float)))

    def __repr__(self):
        return f"DensityMatrix(dim={self.dim}, trace={self.trace().real:.12g})"


def fock_state(n: int, dim: int) -> DensityMatrix:
    """Projector ``|n><n|`` in a basis of size ``dim``."""
    if n < 0 or n >= dim:
        raise DimensionError(f"Fock label {n} outside basis of dim {dim}")
    rho = np.zeros((dim, dim), dtype=complex)
    rho[n, n] = 1.0
    return DensityMatrix(rho)


def truncation_dim(mean_n: float, tail_tol: float) -> int:
    """Smallest ``N`` with ``sum_{n >= N} Poisson(mean_n; n) < tail_tol``."""
    if not 0.0 < tail_tol < 1.0:
        raise ValueError("tail_tol must lie in (0, 1)")
    if mean_n < 0:
        raise ValueError("mean_n must be non-negative")
    if mean_n == 0:
        return 1
    # P(X >= N) == sf(N - 1); bracket then bisect on the monotone tail
    lo = 0
    hi = max(1, int(np.ceil(mean_n)))
    while poisson.sf(hi - 1, mean_n) >= tail_tol:
        lo = hi
        hi *= 2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if poisson.sf(mid - 1, mean_n) < tail_tol:
            hi = mid
        else:
            lo = mid
    return hi


def coherent_amplitudes(alpha: complex, dim: int) -> np.ndarray:
    """``<n|alpha>`` for n < dim, built in log space."""
    n = np.arange(dim)
    if alpha == 0:
        out = np.zeros(dim, dtype=complex)
        out[0] = 1.0
        return out
    r = abs(alpha)
    log_mag = -0.5 * r * r + n * np.log(r) - 0.5 * gammaln(n + 1)
    return np.exp(log_mag) * np.exp(1j * n * np.angle(alpha))


def coherent_state(mean_n: float, phase: float, dim: int, tail_tol: float = 1e-10) -> DensityMatrix:
    """Pure coherent state ``|alpha><alpha|`` with ``alpha = sqrt(mean_n) e^{i phase}``.

    The state is not renormalised after truncation, so the diagonal is the
    Poisson pmf exactly and the trace falls short by the tail mass.

    Raises:
        TruncationError: if the Poisson tail beyond ``dim - 1`` exceeds
            ``tail_tol``; ``required_dim`` holds the fix.
    """
    if mean_n < 0:
        raise ValueError("mean_n must be non-negative")
    needed = truncation_dim(mean_n, tail_tol)
    if dim < needed:
        raise TruncationError(
            f"coherent state with mean {mean_n} needs dim >= {needed} "
            f"for tail < {tail_tol:g}, got {dim}",
            required_dim=needed,
        )
    psi = coherent_amplitudes(np.sqrt(mean_n) * np.exp(1j * phase), dim)
    return DensityMatrix(np.outer(psi, psi.conj()))


def poisson_state(mean_n: float, dim: int, tail_tol: float = 1e-10) -> DensityMatrix:
    """Diagonal (dephased) state with Poisson photon statistics."""
    needed = truncation_dim(mean_n, tail_tol)
    if dim < needed:
        raise TruncationError(
            f"Poisson({mean_n}) needs dim >= {needed}, got {dim}", required_dim=needed
        )
    return DensityMatrix.from_diagonal(poisson.pmf(np.arange(dim), mean_n))


def lowering_operator(dim: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, dim, dtype=float)), 1)


def ladder_apply(which: Literal["lower", "raise", "number"], rho) -> np.ndarray:
    """Left-multiply ``rho`` by ``a``, ``a^dagger`` or ``a^dagger a``."""
    m = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)
    dim = m.shape[0]
    out = np.zeros_like(m, dtype=complex)
    s = np.sqrt(np.arange(1, dim, dtype=float))[:, None]
    if which == "lower":
        out[:-1] = s * m[1:]
    elif which == "raise":
        # row dim-1 of a^dagger rho would land on |dim>; it is dropped
        out[1:] = s * m[:-1]
    elif which == "number":
        out = np.arange(dim, dtype=float)[:, None] * m
    else:
        raise ValueError(f"unknown ladder operation {which!r}")
    return out


@dataclass(frozen=True)
class Diagnostics:
    hermiticity_defect: float
    trace_defect: float
    min_eigenvalue: float
    eigenvalue_method: str  # "exact" or "gershgorin" (a lower bound)
    min_diagonal: float

    @property
    def negativity(self) -> float:
        return max(0.0, -self.min_eigenvalue)

    def ok(self, herm_tol=1e-12, trace_tol=1e-9, neg_tol=1e-10) -> bool:
        return (
            self.hermiticity_defect <= herm_tol
            and self.trace_defect <= trace_tol
            and self.min_diagonal >= -neg_tol
        )


def validate(rho) -> Diagnostics:
    """Report Hermiticity, trace and positivity defects of ``rho``.

    For ``dim <= 256`` the smallest eigenvalue of the Hermitian part is
    computed exactly; above that a Gershgorin lower bound is reported.
    """
    m = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)
    herm = float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0
    tr = np.trace(m)
    trace_defect = float(abs(tr - 1.0))
    h = 0.5 * (m + m.conj().T)
    if m.shape[0] <= EXACT_EIG_MAX_DIM:
        min_eig = float(np.linalg.eigvalsh(h)[0])
        method = "exact"
    else:
        radii = np.sum(np.abs(h), axis=1) - np.abs(np.diag(h))
        min_eig = float(np.min(np.diag(h).real - radii))
        method = "gershgorin"
    return Diagnostics(herm, trace_defect, min_eig, method, float(np.min(m.diagonal().real)))

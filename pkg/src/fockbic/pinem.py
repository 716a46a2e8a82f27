"""Free-electron energy-gain/loss spectra of the intracavity state.

The electron energy ladder ``|k>`` (k > 0 is gain) couples to the cavity
through the scattering operator

    S = exp(g a b^dag - conj(g) a^dag b),    b|k> = |k-1>

so absorbing a photon raises the electron by one quantum.  ``S`` conserves
``n + k``; starting from ``k = 0`` and ``n = m`` the dynamics stays in a
single tridiagonal block whose exponential is taken exactly.  Because
blocks never mix different ``m``, the spectrum depends only on the photon
distribution of the state, and only on ``|g|``.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .errors import TruncationError
from .fockspace import DensityMatrix

EDGE_TOL = 1e-10


@dataclass(frozen=True)
class PinemSpectrum:
    g: complex
    k: np.ndarray
    probabilities: np.ndarray

    @property
    def total(self) -> float:
        return float(self.probabilities.sum())

    def at(self, k: int) -> float:
        idx = k - int(self.k[0])
        if 0 <= idx < self.k.size:
            return float(self.probabilities[idx])
        return 0.0


def _block_amplitudes(m: int, g_abs: float, k_max: int):
    """|<k, m-k| S |0, m>|^2 for k in [-k_max, min(m, k_max)]."""
    k_hi = min(m, k_max)
    ks = np.arange(-k_max, k_hi + 1)
    if ks.size == 1:
        return ks, np.ones(1)
    # coupling between |k, m-k> and |k+1, m-k-1> is |g| sqrt(m-k)
    off = g_abs * np.sqrt(m - ks[:-1].astype(float))
    evals, evecs = eigh_tridiagonal(np.zeros(ks.size), off)
    start = k_max  # index of k = 0
    amp = evecs @ (np.exp(-1j * evals) * evecs[start])
    return ks, np.abs(amp) ** 2


def pinem_spectrum(rho, g: complex, k_max: int | None = None, prob_floor: float = 1e-300) -> PinemSpectrum:
    """Electron spectrum ``P(k)`` for k in ``[-k_max, k_max]`` after one interaction.

    The cavity basis is extended internally so photon emission by the
    electron is never truncated.  The electron ladder is truncated at
    ``|k| = k_max`` (default ``dim - 1``).

    Raises:
        TruncationError: if more than 1e-10 probability reaches the ladder
            edge; ``required_dim`` then names the ladder size needed.
    """
    p = rho.diagonal() if isinstance(rho, DensityMatrix) else np.asarray(rho).diagonal().real
    dim = p.size
    if k_max is None:
        k_max = dim - 1
    k_max = int(k_max)
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    g_abs = abs(g)
    out = np.zeros(2 * k_max + 1)
    edge = 0.0
    for m in np.nonzero(p > prob_floor)[0]:
        ks, probs = _block_amplitudes(int(m), g_abs, k_max)
        out[ks + k_max] += p[m] * probs
        edge += p[m] * probs[0]
        if m >= k_max:
            edge += p[m] * probs[-1]
    if edge > EDGE_TOL:
        needed = _required_k_max(p, g_abs, k_max)
        raise TruncationError(
            f"electron ladder k_max={k_max} too small: {edge:.3g} probability at the edge; "
            f"use k_max >= {needed} (ladder of {2 * needed + 1} levels)",
            required_dim=2 * needed + 1,
        )
    return PinemSpectrum(complex(g), np.arange(-k_max, k_max + 1), out)


def _required_k_max(p, g_abs, k_max):
    m_max = int(np.nonzero(p > EDGE_TOL)[0].max()) if np.any(p > EDGE_TOL) else 0
    # classical width 2|g|sqrt(n) plus generous Bessel tail
    guess = max(k_max + 1, int(np.ceil(2 * g_abs * np.sqrt(m_max + 1) + 10 * (g_abs * np.sqrt(m_max + 1)) ** (1 / 3) + 10)))
    return guess


def discriminate(a: PinemSpectrum, b: PinemSpectrum) -> float:
    """Total-variation distance ``0.5 * sum |P_a - P_b|`` between two spectra on the same k range."""
    if a.k.shape != b.k.shape or np.any(a.k != b.k):
        raise ValueError("spectra must share the same k range")
    return float(0.5 * np.sum(np.abs(a.probabilities - b.probabilities)))

"""Photon statistics, number squeezing, g2(0), Fock fidelity and Husimi Q."""

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .errors import DimensionError, UndefinedObservableError
from .fockspace import DensityMatrix


def _probs(state) -> np.ndarray:
    if isinstance(state, DensityMatrix):
        return state.diagonal()
    arr = np.asarray(state)
    if arr.ndim == 2:
        return arr.diagonal().real.copy()
    return np.asarray(arr, dtype=float)


def photon_distribution(rho) -> np.ndarray:
    """Raw diagonal ``p_n = rho_nn`` (no clipping or renormalisation)."""
    return _probs(rho)


def mean_var(rho) -> tuple[float, float]:
    p = _probs(rho)
    n = np.arange(p.size, dtype=float)
    mean = float(p @ n)
    return mean, float(p @ (n - mean) ** 2)


def squeezing_db(rho) -> float:
    """Number squeezing ``10 log10(var/mean)``; negative is sub-Poissonian, ``-inf`` for Fock states."""
    mean, var = mean_var(rho)
    if mean <= 0:
        raise UndefinedObservableError("squeezing is undefined for zero mean photon number")
    fano = var / mean
    if fano <= 1e-14:
        return -np.inf
    return float(10 * np.log10(fano))


def g2_zero(rho) -> float:
    p = _probs(rho)
    n = np.arange(p.size, dtype=float)
    mean = float(p @ n)
    if mean <= 0:
        raise UndefinedObservableError("g2(0) is undefined for the vacuum")
    return float(p @ (n * (n - 1)) / mean**2)


def fidelity_fock(rho, n0: int) -> float:
    p = _probs(rho)
    if not 0 <= n0 < p.size:
        raise DimensionError(f"Fock label {n0} outside basis of dim {p.size}")
    return float(p[n0])


def trajectory_observables(probs: np.ndarray, n0: int | None = None) -> dict:
    """Vectorised observables for a (T, dim) array of populations.

    Undefined entries (vacuum mean) are NaN instead of raising.
    """
    probs = np.atleast_2d(probs)
    n = np.arange(probs.shape[1], dtype=float)
    total = probs.sum(axis=1)
    mean = probs @ n
    var = probs @ n**2 - mean**2
    with np.errstate(divide="ignore", invalid="ignore"):
        fano = np.where(mean > 0, var / np.where(mean > 0, mean, 1), np.nan)
        sq = np.where(fano > 1e-14, 10 * np.log10(np.where(fano > 1e-14, fano, 1)), -np.inf)
        sq = np.where(np.isnan(fano), np.nan, sq)
        g2 = np.where(mean > 0, probs @ (n * (n - 1)) / np.where(mean > 0, mean, 1) ** 2, np.nan)
    fid = probs[:, n0] if n0 is not None and 0 <= n0 < probs.shape[1] else np.full(len(probs), np.nan)
    return {
        "mean_n": mean,
        "var_n": var,
        "squeezing_db": sq,
        "g2": g2,
        "fidelity_n0": fid,
        "trace_defect": total - 1.0,
    }


@dataclass(frozen=True)
class HusimiGrid:
    """Husimi Q sampled on a rectangular alpha-plane grid.

    ``values[j, i]`` is Q at ``re[i] + 1j * im[j]``.
    """

    re: np.ndarray
    im: np.ndarray
    values: np.ndarray

    @property
    def cell_area(self) -> float:
        dre = self.re[1] - self.re[0] if self.re.size > 1 else 1.0
        dim_ = self.im[1] - self.im[0] if self.im.size > 1 else 1.0
        return float(dre * dim_)

    def normalization(self) -> float:
        return float(self.values.sum() * self.cell_area)


def husimi_axes(re_min, re_max, n_re, im_min, im_max, n_im):
    return np.linspace(re_min, re_max, n_re), np.linspace(im_min, im_max, n_im)


def husimi(rho, re_axis, im_axis, chunk: int = 4096) -> HusimiGrid:
    """``Q(alpha) = <alpha|rho|alpha> / pi`` on the grid ``re_axis x im_axis``.

    Coherent overlaps use only the ``dim`` basis states of ``rho``; the
    neglected part of ``|alpha>`` is bounded by the state's own tail mass.
    """
    m = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)
    dim = m.shape[0]
    re_axis = np.asarray(re_axis, dtype=float)
    im_axis = np.asarray(im_axis, dtype=float)

    mean, var = mean_var(m)
    need = np.sqrt(max(mean, 0.0)) + 5 * max(var, 0.0) ** 0.25
    radius = min(
        max(abs(re_axis[0]), abs(re_axis[-1])), max(abs(im_axis[0]), abs(im_axis[-1]))
    )
    if radius < need:
        warnings.warn(
            f"Husimi grid radius {radius:.3g} below recommended {need:.3g}; "
            "normalisation will be incomplete",
            stacklevel=2,
        )

    alphas = (re_axis[None, :] + 1j * im_axis[:, None]).ravel()
    n = np.arange(dim)
    half_lgamma = 0.5 * gammaln(n + 1)
    out = np.empty(alphas.size)
    for start in range(0, alphas.size, chunk):
        a = alphas[start : start + chunk]
        r = np.abs(a)
        with np.errstate(divide="ignore", invalid="ignore"):
            logr = np.log(r)
            # n * log|alpha| with 0 * log 0 := 0
            expo = np.where(n[None, :] == 0, 0.0, n[None, :] * logr[:, None])
        amp = np.exp(-0.5 * r[:, None] ** 2 + expo - half_lgamma[None, :])
        c = amp * np.exp(1j * n[None, :] * np.angle(a)[:, None])
        # <alpha|rho|alpha> = sum_mn conj(c_m) rho_mn c_n
        out[start : start + a.size] = np.sum((c.conj() @ m) * c, axis=1).real
    # cancellation leaves roundoff-level negatives far from the state; clear those only
    floor = 1e-12 * max(float(out.max(initial=0.0)), 0.0)
    out[(out < 0) & (out > -floor)] = 0.0
    return HusimiGrid(re_axis, im_axis, out.reshape(im_axis.size, re_axis.size) / np.pi)

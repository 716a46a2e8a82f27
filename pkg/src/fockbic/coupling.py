"""Frequency-dependent in-coupling functions and the derived loss function.

Every model exposes ``|K_c(w)|^2`` (or, for :class:`QuadraticLoss`, the
loss directly).  The complex loss function is

    K_l(w) = i/(2 pi) * Int dw' |K_c(w')|^2 / (w - w' + i eta),  eta -> 0+
           = |K_c(w)|^2 / 2  +  i/(2 pi) * PV Int |K_c(w')|^2 / (w - w') dw'

plus an independent background rate ``kappa_i`` added to the real part.
All frequencies and rates are in eV.
"""

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.integrate import trapezoid

from .errors import AccuracyError, ConfigError, UnsupportedModelError

TABULATED_HEADER = "# omega_eV kc2_eV"
PV_REL_TOL = 1e-3


@dataclass(frozen=True)
class Constant:
    """Frequency-independent (Markovian) coupling, ``K_c = sqrt(2 kappa)``."""

    kappa: float
    kappa_i: float = 0.0

    def __post_init__(self):
        _check_rates(kappa=self.kappa, kappa_i=self.kappa_i)

    def incoupling(self, omega):
        return np.sqrt(2 * self.kappa) * np.ones_like(np.asarray(omega, dtype=float), dtype=complex)

    def kc2(self, omega):
        return 2 * self.kappa * np.ones_like(np.asarray(omega, dtype=float))

    def loss_real(self, omega):
        return self.kappa + self.kappa_i + 0 * np.asarray(omega, dtype=float)


@dataclass(frozen=True)
class TerminatedWaveguide:
    """Resonator leaking directly and via a mirror round trip.

    ``K_c = sqrt(2 kappa) (1 - exp(i (w/gamma + theta)))``; gamma is the
    inverse round-trip time.
    """

    kappa: float
    gamma: float
    theta: float = 0.0
    kappa_i: float = 0.0

    def __post_init__(self):
        _check_rates(kappa=self.kappa, gamma=self.gamma, kappa_i=self.kappa_i)
        if self.gamma == 0:
            raise ConfigError("gamma must be positive")

    @classmethod
    def with_zero_at(cls, omega0, kappa, gamma, kappa_i=0.0):
        """Choose the phase offset so the coupling vanishes at ``omega0``."""
        theta = -np.mod(omega0 / gamma, 2 * np.pi)
        return cls(kappa=kappa, gamma=gamma, theta=float(theta), kappa_i=kappa_i)

    def phase(self, omega):
        return np.asarray(omega, dtype=float) / self.gamma + self.theta

    def incoupling(self, omega):
        return np.sqrt(2 * self.kappa) * (1 - np.exp(1j * self.phase(omega)))

    def kc2(self, omega):
        return 4 * self.kappa * (1 - np.cos(self.phase(omega)))

    def loss_real(self, omega):
        return 2 * self.kappa * (1 - np.cos(self.phase(omega))) + self.kappa_i

    # band-averaged |K_c|^2; subtracted before the principal-value integral
    @property
    def kc2_background(self):
        return 4 * self.kappa

    @property
    def frequency_scale(self):
        return self.gamma


@dataclass(frozen=True)
class FanoTwoResonator:
    """High-Q resonator leaking directly and through a low-Q resonator.

    ``K_c = sqrt(2 kappa) (w - w_d) / (w - w_d + i gamma)``.
    """

    kappa: float
    gamma: float
    omega_d: float
    kappa_i: float = 0.0

    def __post_init__(self):
        _check_rates(kappa=self.kappa, gamma=self.gamma, kappa_i=self.kappa_i)
        if self.gamma == 0:
            raise ConfigError("gamma must be positive")

    def incoupling(self, omega):
        x = np.asarray(omega, dtype=float) - self.omega_d
        return np.sqrt(2 * self.kappa) * x / (x + 1j * self.gamma)

    def kc2(self, omega):
        x = np.asarray(omega, dtype=float) - self.omega_d
        return 2 * self.kappa * x**2 / (x**2 + self.gamma**2)

    def loss_real(self, omega):
        return 0.5 * self.kc2(omega) + self.kappa_i

    @property
    def kc2_background(self):
        return 2 * self.kappa

    @property
    def frequency_scale(self):
        return self.gamma


@dataclass(frozen=True)
class QuadraticLoss:
    """Near-BIC expansion ``Re K_l = kappa_i + c2 (w - w0)^2``.

    The Lamb shift is taken as absorbed into the resonator frequency, so
    ``Im K_l = 0``.  ``c2`` is in 1/eV.
    """

    omega0: float
    c2: float
    kappa_i: float = 0.0

    def __post_init__(self):
        _check_rates(c2=self.c2, kappa_i=self.kappa_i)

    @classmethod
    def from_waveguide(cls, omega0, kappa, gamma, kappa_i=0.0):
        """Curvature of a terminated waveguide at its zero: ``c2 = kappa/gamma^2``."""
        return cls(omega0=omega0, c2=kappa / gamma**2, kappa_i=kappa_i)

    def loss_real(self, omega):
        return self.kappa_i + self.c2 * (np.asarray(omega, dtype=float) - self.omega0) ** 2


@dataclass(frozen=True, eq=False)
class Tabulated:
    """Sampled ``|K_c(w)|^2`` on a strictly increasing grid (linear interpolation, zero outside)."""

    omega: np.ndarray = field(repr=False)
    kc2_samples: np.ndarray = field(repr=False)
    kappa_i: float = 0.0

    def __post_init__(self):
        w = np.asarray(self.omega, dtype=float)
        k = np.asarray(self.kc2_samples, dtype=float)
        if w.ndim != 1 or w.shape != k.shape or w.size < 2:
            raise ConfigError("tabulated coupling needs two equal-length columns with >= 2 rows")
        if np.any(np.diff(w) <= 0):
            raise ConfigError("tabulated omega must be strictly increasing")
        if np.any(k < 0):
            raise ConfigError("tabulated |K_c|^2 must be non-negative")
        _check_rates(kappa_i=self.kappa_i)
        object.__setattr__(self, "omega", w)
        object.__setattr__(self, "kc2_samples", k)

    @classmethod
    def from_file(cls, path, kappa_i=0.0):
        path = Path(path)
        with path.open() as fh:
            first = fh.readline().strip()
        if first.split() != TABULATED_HEADER.split():
            raise ConfigError(f"{path}: first line must be {TABULATED_HEADER!r}, got {first!r}")
        data = np.loadtxt(path, comments="#", ndmin=2)
        if data.shape[1] != 2:
            raise ConfigError(f"{path}: expected 2 columns, got {data.shape[1]}")
        return cls(data[:, 0], data[:, 1], kappa_i=kappa_i)

    def to_file(self, path):
        np.savetxt(path, np.column_stack([self.omega, self.kc2_samples]), header=TABULATED_HEADER[2:], comments="# ")

    def incoupling(self, omega):
        # phase of the sampled coupling is unknown; magnitude only
        return np.sqrt(self.kc2(omega)).astype(complex)

    def kc2(self, omega):
        return np.interp(omega, self.omega, self.kc2_samples, left=0.0, right=0.0)

    def loss_real(self, omega):
        return 0.5 * self.kc2(omega) + self.kappa_i

    kc2_background = 0.0

    @property
    def frequency_scale(self):
        return float(np.min(np.diff(self.omega))) * 10


CouplingModel = Constant | TerminatedWaveguide | FanoTwoResonator | QuadraticLoss | Tabulated


def _check_rates(**rates):
    for name, value in rates.items():
        if not np.isfinite(value) or value < 0:
            raise ConfigError(f"{name} must be a finite non-negative rate, got {value}")


@dataclass(frozen=True)
class FrequencyGrid:
    """Uniform grid for the principal-value integral; ``eta`` regularises the kernel."""

    omega_min: float
    omega_max: float
    count: int
    eta: float | None = None

    def __post_init__(self):
        if self.count < 2:
            raise ConfigError("frequency grid needs count >= 2")
        if not self.omega_max > self.omega_min:
            raise ConfigError("frequency grid needs omega_max > omega_min")
        if self.eta is None:
            object.__setattr__(self, "eta", 1e-3 * self.spacing)
        elif self.eta <= 0:
            raise ConfigError("eta must be positive")

    @property
    def spacing(self):
        return (self.omega_max - self.omega_min) / (self.count - 1)

    @property
    def points(self):
        return np.linspace(self.omega_min, self.omega_max, self.count)

    @classmethod
    def around(cls, model, omega, half_width_scales=400.0, count=2**15 + 1):
        """Default grid centred on the requested frequencies."""
        if isinstance(model, Tabulated):
            return cls(float(model.omega[0]), float(model.omega[-1]), max(model.omega.size, 2049))
        w = np.atleast_1d(np.asarray(omega, dtype=float))
        half = half_width_scales * model.frequency_scale
        return cls(float(w.min() - half), float(w.max() + half), count)


def k_c(model, omega):
    """Complex in-coupling amplitude ``K_c(w)``."""
    if isinstance(model, QuadraticLoss):
        raise UnsupportedModelError("QuadraticLoss specifies the loss directly and has no K_c")
    return model.incoupling(omega)


def loss_imag(model, omega, grid=None, return_error=False):
    """Lamb-shift part ``Im K_l(w)`` by a principal-value integral.

    The pole is removed by subtracting ``f(w)`` from ``f(w') = |K_c(w')|^2``
    (minus its band background, whose transform vanishes on an infinite
    band); the remaining integrand is smooth and is integrated with the
    trapezoid rule on ``h`` and ``2h`` grids, Richardson-combined.  The
    ``h``/``2h`` difference is the error estimate.

    Raises:
        AccuracyError: estimated error above 1e-3 relative to
            ``max(|Im K_l|, max |K_c|^2 / 2)``.
    """
    scalar = np.ndim(omega) == 0
    w = np.atleast_1d(np.asarray(omega, dtype=float))
    if isinstance(model, (Constant, QuadraticLoss)):
        out = np.zeros_like(w)
        err = np.zeros_like(w)
    else:
        grid = grid or FrequencyGrid.around(model, w)
        out, err = _pv_transform(model, w, grid)
        scale = np.maximum(np.abs(out), 0.5 * np.max(model.kc2(grid.points)))
        bad = err > PV_REL_TOL * np.where(scale > 0, scale, 1.0)
        if np.any(bad):
            i = int(np.argmax(err / np.where(scale > 0, scale, 1.0)))
            raise AccuracyError(
                f"principal-value error estimate {err[i]:.3g} at omega={w[i]:.6g} exceeds "
                f"{PV_REL_TOL:g} relative; refine the frequency grid (spacing {grid.spacing:.3g})"
            )
    if scalar:
        return (out[0], err[0]) if return_error else out[0]
    return (out, err) if return_error else out


def _chunked(fn, w, grid):
    step = max(1, _CHUNK_ELEMENTS // grid.count)
    parts = [fn(w[i : i + step]) for i in range(0, w.size, step)]
    return tuple(np.concatenate(p) for p in zip(*parts))


_CHUNK_ELEMENTS = 2_000_000


def _pv_transform(model, w, grid):
    return _chunked(lambda chunk: _pv_chunk(model, chunk, grid), w, grid)


def _pv_chunk(model, w, grid):
    pts = grid.points
    h = grid.spacing
    bg = getattr(model, "kc2_background", 0.0)
    f_grid = model.kc2(pts) - bg
    f_w = model.kc2(w) - bg
    dw = 1e-3 * h
    fprime = (model.kc2(w + dw) - model.kc2(w - dw)) / (2 * dw)
    a, b = grid.omega_min, grid.omega_max

    def integrate(stride):
        p = pts[::stride]
        fg = f_grid[::stride]
        x = w[:, None] - p[None, :]
        coincide = np.abs(x) < 1e-12 * h
        safe_x = np.where(coincide, 1.0, x)
        g = np.where(coincide, -fprime[:, None], (fg[None, :] - f_w[:, None]) / safe_x)
        return trapezoid(g, p, axis=1)

    with np.errstate(divide="ignore"):
        log_term = f_w * (np.log(np.abs(w - a)) - np.log(np.abs(w - b)))
    log_term = np.where(f_w == 0, 0.0, log_term)
    fine = integrate(1)
    if (pts.size - 1) % 2 == 0:
        coarse = integrate(2)
        integral = fine + (fine - coarse) / 3.0
        err = np.abs(fine - coarse) / 3.0
    else:
        integral, err = fine, np.full_like(fine, np.inf)
    return (integral + log_term) / (2 * np.pi), err / (2 * np.pi)


def loss_real_numeric(model, omega, grid=None):
    """``Re K_l`` evaluated from the regularised integral itself.

    The Lorentzian kernel ``eta / ((w-w')^2 + eta^2)`` is integrated with
    the value at ``w`` subtracted (its integral is done analytically) and
    the result is Richardson-extrapolated from ``eta`` and ``eta/2`` to
    ``eta -> 0``.  Independent of :meth:`loss_real`, which uses the closed
    form; the two must agree.
    """
    if isinstance(model, QuadraticLoss):
        raise UnsupportedModelError("QuadraticLoss has no K_c to integrate")
    scalar = np.ndim(omega) == 0
    w = np.atleast_1d(np.asarray(omega, dtype=float))
    grid = grid or FrequencyGrid.around(model, w)
    pts = grid.points
    a, b = grid.omega_min, grid.omega_max
    f_grid = model.kc2(pts)

    def at(eta, w, f_w):
        x = w[:, None] - pts[None, :]
        resid = (f_grid[None, :] - f_w[:, None]) * eta / (x**2 + eta**2)
        window = np.arctan((w - a) / eta) + np.arctan((b - w) / eta)
        return (f_w * window + trapezoid(resid, pts, axis=1)) / (2 * np.pi)

    def chunk(wc):
        fc = model.kc2(wc)
        return (2 * at(grid.eta / 2, wc, fc) - at(grid.eta, wc, fc),)

    (re,) = _chunked(chunk, w, grid)
    re = re + model.kappa_i
    return re[0] if scalar else re


def k_l(model, omega, grid=None):
    """Complex loss function ``K_l(w)``; real part in closed form plus ``kappa_i``."""
    return model.loss_real(omega) + 1j * loss_imag(model, omega, grid)


def q_factor(model, omega):
    """``w / (2 Re K_l(w))``; ``inf`` marks a lossless (infinite-Q) point."""
    re = np.asarray(model.loss_real(omega), dtype=float)
    w = np.asarray(omega, dtype=float)
    with np.errstate(divide="ignore"):
        q = np.where(re > 0, w / np.where(re > 0, 2 * re, 1.0), np.inf)
    return float(q) if q.ndim == 0 else q


def transition_frequency(omega_a, beta, n):
    """Frequency ``w_{n,n-1} = w_a (1 + 2 beta (n-1))`` for adding the n-th photon."""
    return omega_a * (1 + 2 * beta * (np.asarray(n, dtype=float) - 1))


def kappa_of_n(model, omega_a, beta, n):
    """Photon-number dependent loss ``kappa(n) = Re K_l(w_{n,n-1})``.

    The population of ``|n>`` then decays at ``2 n kappa(n)``.
    """
    n_arr = np.asarray(n, dtype=float)
    if np.any(n_arr < 1):
        raise ValueError("kappa_of_n requires n >= 1")
    out = model.loss_real(transition_frequency(omega_a, beta, n_arr))
    return float(out) if np.ndim(out) == 0 else out

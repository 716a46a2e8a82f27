"""Design rules for n-photon bound states: stable photon number, detuning, loss curves, regimes."""

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .coupling import QuadraticLoss, kappa_of_n
from .errors import ConfigError


class Regime(str, Enum):
    FOCK_CAPABLE = "fock_capable"
    FAILED_FOCK = "failed_fock"
    WASHED_OUT = "washed_out"


@dataclass(frozen=True)
class DesignPoint:
    """Resonator tuning relative to the loss zero.

    ``delta0`` is ``omega0 - omega_a`` in eV; ``c2`` in 1/eV.
    """

    omega_a: float
    beta: float
    delta0: float
    kappa_i: float = 0.0
    c2: float = 0.0

    @property
    def omega0(self):
        return self.omega_a + self.delta0

    def coupling(self) -> QuadraticLoss:
        return QuadraticLoss(omega0=self.omega0, c2=self.c2, kappa_i=self.kappa_i)


def stable_photon_number(p: DesignPoint) -> float:
    """``n0 = delta0 / (2 beta omega_a) + 1``, where the loss of the n0-th photon vanishes."""
    if p.beta <= 0:
        raise ConfigError("stable photon number needs beta > 0 (no Kerr, no photon-number BIC)")
    return p.delta0 / (2 * p.beta * p.omega_a) + 1


def detuning_for_fock(n0: int, omega_a: float, beta: float) -> float:
    """Detuning ``omega0 - omega_a`` that places the loss zero at photon number ``n0``."""
    if beta <= 0:
        raise ConfigError("detuning_for_fock needs beta > 0")
    if n0 < 1:
        raise ValueError("n0 must be >= 1")
    return 2 * beta * omega_a * (n0 - 1)


@dataclass(frozen=True)
class LossCurve:
    n: np.ndarray
    kappa: np.ndarray

    @property
    def argmin(self) -> int:
        return int(self.n[np.argmin(self.kappa)])

    @property
    def min(self) -> float:
        return float(np.min(self.kappa))

    def rows(self):
        return list(zip(self.n.tolist(), self.kappa.tolist()))


def loss_curve(p: DesignPoint, coupling=None, n_max: int = 60) -> LossCurve:
    """``kappa(n)`` for n = 1..n_max; ``coupling`` defaults to the point's quadratic model."""
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    model = coupling if coupling is not None else p.coupling()
    n = np.arange(1, n_max + 1)
    return LossCurve(n, np.asarray(kappa_of_n(model, p.omega_a, p.beta, n), dtype=float))


@dataclass(frozen=True)
class ClassifyThresholds:
    """Regime thresholds.

    ``integrality``: max ``|n0 - round(n0)|`` for a Fock-capable point.
    ``contrast``: minimum ratio of the largest to the smallest loss on
    photon numbers ``1 .. probe_factor * n0``.
    """

    integrality: float = 1e-3
    contrast: float = 10.0
    probe_factor: float = 5.0


def loss_contrast(p: DesignPoint, coupling=None, probe_factor: float = 5.0) -> float:
    """Dynamic range ``max kappa / min kappa`` of the loss curve over the loading range."""
    n0 = stable_photon_number(p)
    n_max = max(2, int(np.ceil(probe_factor * max(n0, 1.0))))
    curve = loss_curve(p, coupling, n_max)
    lo = curve.min
    hi = float(np.max(curve.kappa))
    if lo <= 0:
        return np.inf if hi > 0 else 1.0
    return hi / lo


def classify(p: DesignPoint, coupling=None, thresholds: ClassifyThresholds = ClassifyThresholds()) -> Regime:
    """Classify a design point as Fock-capable, failed-Fock (non-integer n0) or washed out."""
    n0 = stable_photon_number(p)
    if n0 < 1:
        return Regime.WASHED_OUT
    if loss_contrast(p, coupling, thresholds.probe_factor) <= thresholds.contrast:
        return Regime.WASHED_OUT
    if abs(n0 - round(n0)) < thresholds.integrality:
        return Regime.FOCK_CAPABLE
    return Regime.FAILED_FOCK

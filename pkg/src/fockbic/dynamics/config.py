"""Simulation configuration, drive envelopes and trajectories.

Public times are in fs; rates and frequencies in eV.  Conversion to the
internal time unit (hbar/eV) happens inside the integrators.
"""

from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np
from scipy.integrate import trapezoid

from ..coupling import QuadraticLoss, k_l, transition_frequency
from ..errors import ConfigError
from ..fockspace import DensityMatrix
from ..observables import trajectory_observables
from ..units import fs_to_internal

FWHM_TO_SIGMA = 1.0 / (2.0 * np.sqrt(2.0 * np.log(2.0)))
# gaussian pulses are integrated out to this many FWHM either side of centre
PULSE_SUPPORT_FWHM = 4.0


@dataclass(frozen=True, eq=False)
class DriveEnvelope:
    """Coherent drive ``alpha(t) = envelope(t) * exp(i * carrier * t)``.

    ``kind`` is ``"none"``, ``"gaussian"`` (``duration`` is the FWHM) or
    ``"sampled"`` (complex envelope samples, linearly interpolated, zero
    outside).  ``carrier=None`` means resonant with the resonator.
    """

    kind: str = "none"
    amplitude: complex = 0.0
    center_fs: float = 0.0
    duration_fs: float = 0.0
    carrier: float | None = None
    sample_times_fs: np.ndarray | None = field(default=None, repr=False)
    sample_values: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.kind not in ("none", "gaussian", "sampled"):
            raise ConfigError(f"unknown drive kind {self.kind!r}")
        if self.kind == "gaussian" and not self.duration_fs > 0:
            raise ConfigError("gaussian pulse needs duration_fs > 0")
        if self.kind == "sampled":
            t = np.asarray(self.sample_times_fs, dtype=float)
            v = np.asarray(self.sample_values, dtype=complex)
            if t.ndim != 1 or t.shape != v.shape or t.size < 2 or np.any(np.diff(t) <= 0):
                raise ConfigError("sampled drive needs increasing times and matching values")
            object.__setattr__(self, "sample_times_fs", t)
            object.__setattr__(self, "sample_values", v)

    @classmethod
    def gaussian(cls, amplitude, center_fs, duration_fs, carrier=None):
        return cls("gaussian", complex(amplitude), float(center_fs), float(duration_fs), carrier)

    @property
    def active(self) -> bool:
        if self.kind == "none":
            return False
        if self.kind == "gaussian":
            return self.amplitude != 0
        return bool(np.any(self.sample_values != 0))

    def support_fs(self):
        """Time window outside which the drive is treated as zero, or None."""
        if not self.active:
            return None
        if self.kind == "gaussian":
            half = PULSE_SUPPORT_FWHM * self.duration_fs
            return self.center_fs - half, self.center_fs + half
        return float(self.sample_times_fs[0]), float(self.sample_times_fs[-1])

    def envelope(self, t_fs):
        if self.kind == "gaussian":
            sigma = self.duration_fs * FWHM_TO_SIGMA
            return self.amplitude * np.exp(-0.5 * ((t_fs - self.center_fs) / sigma) ** 2)
        if self.kind == "sampled":
            ts = self.sample_times_fs
            re = np.interp(t_fs, ts, self.sample_values.real, left=0.0, right=0.0)
            im = np.interp(t_fs, ts, self.sample_values.imag, left=0.0, right=0.0)
            return re + 1j * im
        return 0.0 * t_fs

    def scaled(self, factor) -> "DriveEnvelope":
        if self.kind == "sampled":
            return replace(self, sample_values=self.sample_values * factor)
        return replace(self, amplitude=self.amplitude * factor)

    def pulse_area(self) -> complex:
        """Integral of the envelope over time, in eV * hbar/eV (dimensionless)."""
        if self.kind == "gaussian":
            sigma = fs_to_internal(self.duration_fs) * FWHM_TO_SIGMA
            return self.amplitude * sigma * np.sqrt(2 * np.pi)
        if self.kind == "sampled":
            return trapezoid(self.sample_values, fs_to_internal(self.sample_times_fs))
        return 0.0


@dataclass(frozen=True, eq=False)
class SimulationConfig:
    """Resonator, coupling, drive, truncation and tolerances for one run.

    Args:
        omega_a: linear resonance frequency (eV).
        beta: dimensionless Kerr coefficient; transitions sit at
            ``omega_a (1 + 2 beta n)``.
        coupling: a coupling model from :mod:`fockbic.coupling`.
        dim: Fock truncation.
        frame: ``"rotating"`` (at ``omega_a``) or ``"lab"``.
        trace_budget: allowed trace drift per fs of evolved time.
        n0: Fock order used for fidelity records; inferred from a
            :class:`QuadraticLoss` coupling when omitted.
    """

    omega_a: float
    beta: float
    coupling: object
    dim: int
    drive: DriveEnvelope = field(default_factory=DriveEnvelope)
    frame: str = "rotating"
    rtol: float = 1e-10
    atol: float = 1e-12
    trace_budget: float = 1e-9
    n0: int | None = None

    def __post_init__(self):
        if self.beta < 0:
            raise ConfigError("beta must be >= 0")
        if self.dim < 2:
            raise ConfigError("dim must be >= 2")
        if self.omega_a <= 0:
            raise ConfigError("omega_a must be positive")
        if self.rtol <= 0 or self.atol <= 0 or self.trace_budget <= 0:
            raise ConfigError("tolerances must be positive")
        if self.frame not in ("rotating", "lab"):
            raise ConfigError(f"unknown frame {self.frame!r}")

    def with_(self, **changes) -> "SimulationConfig":
        return replace(self, **changes)

    @property
    def undriven(self) -> "SimulationConfig":
        return replace(self, drive=DriveEnvelope())

    @cached_property
    def loss_values(self) -> np.ndarray:
        """``K_l(w_{m,m-1})`` for m = 0..dim-1 (entry 0 is unused and set to 0)."""
        m = np.arange(1, self.dim)
        out = np.zeros(self.dim, dtype=complex)
        out[1:] = k_l(self.coupling, transition_frequency(self.omega_a, self.beta, m))
        out.flags.writeable = False
        return out

    @property
    def death_rates(self) -> np.ndarray:
        """Population decay rates ``2 n kappa(n)`` (eV)."""
        return 2 * np.arange(self.dim) * self.loss_values.real

    def energies(self) -> np.ndarray:
        """Diagonal of the conservative Hamiltonian in the chosen frame (eV)."""
        m = np.arange(self.dim, dtype=float)
        e = self.beta * self.omega_a * m * (m - 1)
        if self.frame == "lab":
            e = e + self.omega_a * m
        return e

    def drive_amplitude(self, t_fs):
        """Coefficient of ``a`` in the drive Hamiltonian, in the chosen frame.

        Lab frame: ``alpha(t) = envelope(t) e^{i w_c t}``.  Going to the
        frame rotating at ``omega_a`` sends ``a -> a e^{-i omega_a t}``, so
        the coefficient becomes ``envelope(t) e^{i (w_c - omega_a) t}``.
        """
        carrier = self.omega_a if self.drive.carrier is None else self.drive.carrier
        if self.frame == "rotating":
            carrier = carrier - self.omega_a
        t = fs_to_internal(np.asarray(t_fs, dtype=float))
        return self.drive.envelope(t_fs) * np.exp(1j * carrier * t)

    def fock_target(self) -> int | None:
        if self.n0 is not None:
            return self.n0
        if isinstance(self.coupling, QuadraticLoss) and self.beta > 0:
            n0 = (self.coupling.omega0 - self.omega_a) / (2 * self.beta * self.omega_a) + 1
            if n0 >= 0:
                return int(round(n0))
        return None


@dataclass(eq=False)
class Trajectory:
    """Populations (and optionally full states) on a time grid in fs."""

    times_fs: np.ndarray
    populations: np.ndarray
    n0: int | None = None
    states: list[DensityMatrix] | None = None
    final_state: DensityMatrix | None = None
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        self.times_fs = np.asarray(self.times_fs, dtype=float)
        self.populations = np.asarray(self.populations, dtype=float)
        if np.any(np.diff(self.times_fs) <= 0):
            raise ConfigError("trajectory times must be strictly increasing")

    @cached_property
    def records(self) -> dict:
        return trajectory_observables(self.populations, self.n0)

    def __len__(self):
        return self.times_fs.size

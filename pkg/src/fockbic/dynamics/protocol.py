"""Pump-and-ringdown: load the resonator with a short pulse, then let it decay."""

import numpy as np

from ..errors import ConfigError
from ..fockspace import coherent_state, fock_state
from ..units import fs_to_internal
from .config import SimulationConfig, Trajectory
from .master import evolve


def validate_pulse(config: SimulationConfig):
    """Check the pulse is short against loss and Kerr time scales.

    Requires ``duration < 1/max kappa(n)`` and
    ``duration < 1/(beta omega_a dim)``.
    """
    drive = config.drive
    if drive.kind == "none":
        raise ConfigError("pulse mode needs a drive")
    if drive.kind == "gaussian":
        duration = fs_to_internal(drive.duration_fs)
    else:
        duration = fs_to_internal(drive.sample_times_fs[-1] - drive.sample_times_fs[0])
    kmax = float(np.max(config.loss_values.real[1:]))
    kerr = config.beta * config.omega_a * config.dim
    if kmax > 0 and duration >= 1 / kmax:
        raise ConfigError(f"pulse ({duration:.3g} hbar/eV) not shorter than loss time {1 / kmax:.3g}")
    if kerr > 0 and duration >= 1 / kerr:
        raise ConfigError(f"pulse ({duration:.3g} hbar/eV) not shorter than Kerr time {1 / kerr:.3g}")


def _post_pulse_mean(config, start_fs, end_fs):
    vac = fock_state(0, config.dim)
    traj = evolve(vac, config, [start_fs, end_fs], store_states=False)
    return float(traj.records["mean_n"][-1])


def calibrate_pulse(config: SimulationConfig, target_mean: float, rel_tol: float = 0.01, max_iter: int = 30):
    """Scale the drive amplitude so the post-pulse mean photon number hits ``target_mean``.

    Secant search on the amplitude scale factor, starting from the
    displacement estimate ``|pulse area|^2 = target``.  Returns the
    rescaled config and the achieved mean.
    """
    support = config.drive.support_fs()
    if support is None:
        raise ConfigError("calibration needs a non-zero drive")
    start, end = support

    def f(scale):
        return _post_pulse_mean(config.with_(drive=config.drive.scaled(scale)), start, end) - target_mean

    area = abs(config.drive.pulse_area())
    s0 = np.sqrt(target_mean) / area if area > 0 else 1.0
    s1 = s0 * 1.05
    f0, f1 = f(s0), f(s1)
    for _ in range(max_iter):
        if abs(f1) <= rel_tol * target_mean:
            break
        if f1 == f0:
            raise ConfigError("pulse calibration stalled (secant slope is zero)")
        s2 = s1 - f1 * (s1 - s0) / (f1 - f0)
        if s2 <= 0:
            s2 = 0.5 * s1
        s0, f0 = s1, f1
        s1, f1 = s2, f(s2)
    else:
        raise ConfigError(f"pulse calibration did not reach {target_mean} within {rel_tol:.0%}")
    return config.with_(drive=config.drive.scaled(s1)), f1 + target_mean


def ringdown_grid(start_fs, horizon_fs, points=200, first_fs=1.0):
    """Log-spaced output times from ``start_fs`` to ``start_fs + horizon_fs``."""
    offs = np.geomspace(first_fs, horizon_fs, points - 1)
    return np.concatenate([[start_fs], start_fs + offs])


def pump_and_ringdown(
    config: SimulationConfig,
    ringdown_horizon_fs: float,
    mode: str = "pulse",
    target_mean: float | None = None,
    preload_mean: float | None = None,
    points: int = 200,
    store_states: bool = False,
) -> Trajectory:
    """Run the loading-and-decay protocol.

    ``mode="pulse"`` evolves from vacuum through the drive pulse (optionally
    calibrated to ``target_mean`` photons) and then rings down with the
    drive off.  ``mode="preload"`` skips the pulse and starts from
    ``coherent_state(preload_mean)``; it is exactly :func:`evolve` on that
    state and is the reference for acceptance.
    """
    if mode == "preload":
        if preload_mean is None:
            raise ConfigError("preload mode needs preload_mean")
        rho0 = coherent_state(preload_mean, 0.0, config.dim)
        grid = ringdown_grid(0.0, ringdown_horizon_fs, points)
        return evolve(rho0, config.undriven, grid, store_states=store_states)
    if mode != "pulse":
        raise ConfigError(f"unknown pump mode {mode!r}")

    validate_pulse(config)
    info = {}
    if target_mean is not None:
        config, achieved = calibrate_pulse(config, target_mean)
        info["calibrated_amplitude"] = config.drive.amplitude
        info["post_pulse_mean"] = achieved
    start, end = config.drive.support_fs()
    pulse_times = np.linspace(start, end, 41)
    ring = ringdown_grid(end, ringdown_horizon_fs, points)[1:]
    grid = np.concatenate([pulse_times, ring])
    traj = evolve(fock_state(0, config.dim), config, grid, store_states=store_states)
    traj.info.update(info, pulse_end_fs=end, mode="pulse")
    if "post_pulse_mean" not in traj.info:
        traj.info["post_pulse_mean"] = float(traj.records["mean_n"][pulse_times.size - 1])
    return traj

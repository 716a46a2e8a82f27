"""Undriven populations as a pure-death chain.

Without a drive the diagonal of the master equation closes on itself:

    dp_n/dt = -r_n p_n + r_{n+1} p_{n+1},    r_n = 2 n kappa(n)

This path integrates that chain with an implicit (Radau) solver and is
independent of the sector exponentials used by :func:`evolve`.
"""

import numpy as np
from scipy import sparse
from scipy.integrate import solve_ivp

from ..errors import IntegratorError, UnsupportedError
from ..units import fs_to_internal
from .config import SimulationConfig, Trajectory


def death_chain_matrix(rates) -> sparse.csr_matrix:
    r = np.asarray(rates, dtype=float)
    return sparse.diags([-r, r[1:]], [0, 1], format="csr")


def evolve_diagonal(p0, config: SimulationConfig, t_grid_fs, n0=None, rtol=1e-11, atol=1e-14) -> Trajectory:
    """Integrate the photon-number distribution of an undriven resonator.

    Args:
        p0: initial probabilities, length ``config.dim``.
        t_grid_fs: strictly increasing output times; ``p0`` sits at the first.

    Raises:
        UnsupportedError: if ``config`` carries an active drive.
    """
    if config.drive.active:
        raise UnsupportedError("evolve_diagonal handles undriven dynamics only; use evolve()")
    p0 = np.asarray(p0, dtype=float)
    if p0.shape != (config.dim,):
        raise ValueError(f"p0 must have length {config.dim}")
    times = np.asarray(t_grid_fs, dtype=float)
    if times.ndim != 1 or np.any(np.diff(times) <= 0):
        raise ValueError("t_grid_fs must be strictly increasing")
    if times.size == 1:
        return Trajectory(times, p0[None, :], n0=n0 if n0 is not None else config.fock_target(),
                          info={"path": "diagonal"})

    jac = death_chain_matrix(config.death_rates)
    tau = fs_to_internal(times)
    sol = solve_ivp(
        lambda t, p: jac @ p,
        (tau[0], tau[-1]),
        p0,
        method="Radau",
        t_eval=tau,
        jac=jac,
        rtol=rtol,
        atol=atol,
    )
    if sol.status != 0:
        raise IntegratorError(f"death-chain integration failed: {sol.message}")
    return Trajectory(
        times,
        sol.y.T,
        n0=n0 if n0 is not None else config.fock_target(),
        info={"path": "diagonal", "nfev": sol.nfev},
    )

"""Gaussian moment closure for macroscopic photon numbers.

For the death chain with rate ``r(n) = 2 n kappa(n)`` any function of the
photon number obeys ``d<f>/dt = <r(n) (f(n-1) - f(n))>``.  With ``f = n``
and ``f = n^2``:

    d mu/dt = -<r>
    d V/dt  =  <r> - 2 Cov(n, r)

Closing with a Gaussian (third cumulant zero) of mean ``mu`` and variance
``V`` and expanding ``r`` around ``mu`` gives, to second order,

    d mu/dt = -(r + r'' V / 2)
    d V/dt  =  r + r'' V / 2 - 2 r' V

The expectations are evaluated here by Gauss-Hermite quadrature over the
closing Gaussian, which reproduces the expansion above and stays exact
for the cubic rates of a quadratic loss profile.
"""

from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from ..coupling import transition_frequency
from ..errors import IntegratorError
from ..units import fs_to_internal
from .config import SimulationConfig

_NODES, _WEIGHTS = np.polynomial.hermite_e.hermegauss(9)
_WEIGHTS = _WEIGHTS / _WEIGHTS.sum()


@dataclass(frozen=True)
class MomentTrajectory:
    times_fs: np.ndarray
    mean: np.ndarray
    var: np.ndarray
    closure_warning: bool
    warning_message: str = ""

    @property
    def fano(self):
        with np.errstate(divide="ignore", invalid="ignore"):
            return self.var / self.mean

    @property
    def squeezing_db(self):
        with np.errstate(divide="ignore", invalid="ignore"):
            return 10 * np.log10(self.fano)


def decay_rate_function(config: SimulationConfig):
    """``r(n) = 2 n kappa(n)`` for real ``n``, clipped to zero below n = 0."""
    coupling, wa, beta = config.coupling, config.omega_a, config.beta

    def rate(n):
        n = np.maximum(n, 0.0)
        return 2 * n * coupling.loss_real(transition_frequency(wa, beta, n))

    return rate


def moment_closure_evolve(mean0, var0, config: SimulationConfig, t_grid_fs, rtol=1e-9,
                          mean_floor=1.0) -> MomentTrajectory:
    """Evolve the photon-number mean and variance under the Gaussian closure.

    The drive in ``config`` is ignored (ring-down only).  A warning flag is
    raised when the closure leaves its domain (``var < 0`` or
    ``var > 10 * mean``).  Integration stops once the mean falls to
    ``mean_floor`` photons, where a Gaussian description is meaningless;
    later grid points are NaN.
    """
    rate = decay_rate_function(config)
    times = np.asarray(t_grid_fs, dtype=float)
    tau = fs_to_internal(times)

    def rhs(_, y):
        mu, v = y
        n = mu + np.sqrt(max(v, 0.0)) * _NODES
        r = rate(n)
        er = _WEIGHTS @ r
        cov = _WEIGHTS @ ((n - mu) * r)
        return [-er, er - 2 * cov]

    y0 = [float(mean0), float(var0)]
    if times.size == 1:
        mean, var = np.array([y0[0]]), np.array([y0[1]])
    else:
        def floor(_, y):
            return y[0] - mean_floor

        floor.terminal = True
        floor.direction = -1
        sol = solve_ivp(rhs, (tau[0], tau[-1]), y0, method="LSODA", t_eval=tau, events=floor,
                        rtol=rtol, atol=1e-9 * max(1.0, abs(mean0)))
        if sol.status == -1:
            raise IntegratorError(f"moment closure integration failed: {sol.message}")
        mean = np.full(times.size, np.nan)
        var = np.full(times.size, np.nan)
        mean[: sol.t.size], var[: sol.t.size] = sol.y
    with np.errstate(invalid="ignore"):
        bad = (var < 0) | (var > 10 * np.maximum(mean, 0))
    msg = ""
    if np.any(bad):
        k = int(np.argmax(bad))
        msg = f"closure breakdown at t={times[k]:.6g} fs (mean={mean[k]:.4g}, var={var[k]:.4g})"
    return MomentTrajectory(times, mean, var, bool(np.any(bad)), msg)

"""Master equation with the frequency-resolved nonlinear dissipator.

    d rho/dt = -i [H, rho] + D[rho]

    <m|D[rho]|n> = -(m K_m + n conj(K_n)) rho_mn
                   + sqrt((m+1)(n+1)) (K_{m+1} + conj(K_{n+1})) rho_{m+1,n+1}

with ``K_m = K_l(w_{m,m-1})``.  ``H`` is the Kerr Hamiltonian plus the
coherent drive.

Frame change.  With ``U = exp(i omega_a a^dag a t)`` the rotated state is
``rho~_mn = e^{i omega_a (m-n) t} rho_mn``.  The dissipator only feeds
``rho_{m+1,n+1}`` into ``rho_mn``, both carrying the same ``m-n``, so the
phase factors cancel and ``D`` is unchanged in the rotating frame.  The
Hamiltonian loses ``omega_a a^dag a`` and the drive picks up
``a -> a e^{-i omega_a t}`` (see ``SimulationConfig.drive_amplitude``).

Integration strategy.  While the drive is on, the vectorised density
matrix is integrated with an adaptive embedded Runge-Kutta pair (DOP853).
With the drive off the generator is time independent and splits into
decoupled sectors of fixed ``d = m - n``; each sector is an upper
bidiagonal linear system, propagated exactly with a matrix exponential.
This keeps ns-to-us horizons cheap despite fast Kerr phases.
"""

import numpy as np
from scipy.integrate import solve_ivp
from scipy.linalg import expm

from ..errors import AccuracyError, IntegratorError
from ..fockspace import DensityMatrix
from ..units import fs_to_internal, internal_to_fs
from .config import SimulationConfig, Trajectory


def _matrix(rho):
    return rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)


def _check_dim(m, config):
    if m.shape != (config.dim, config.dim):
        raise ValueError(f"state has shape {m.shape}, config expects dim {config.dim}")


def _dissipator_coefficients(config: SimulationConfig):
    k = config.loss_values
    idx = np.arange(config.dim, dtype=float)
    mk = idx * k
    decay = -(mk[:, None] + mk.conj()[None, :])
    s = np.sqrt(idx[1:] * 1.0)  # sqrt(m+1) for m = 0..dim-2
    feed = np.outer(s, s) * (k[1:, None] + k[1:].conj()[None, :])
    return decay, feed


def dissipator_apply(rho, config: SimulationConfig) -> np.ndarray:
    """``D[rho]``; the top row/column receives nothing from outside the basis."""
    m = _matrix(rho)
    _check_dim(m, config)
    decay, feed = _dissipator_coefficients(config)
    out = decay * m
    out[:-1, :-1] += feed * m[1:, 1:]
    return out


def _commutator_drive(m, eps):
    """``[eps a + conj(eps) a^dag, m]`` with the truncated ladder operators."""
    dim = m.shape[0]
    s = np.sqrt(np.arange(1, dim, dtype=float))
    a_m = np.zeros_like(m)
    m_a = np.zeros_like(m)
    ad_m = np.zeros_like(m)
    m_ad = np.zeros_like(m)
    a_m[:-1] = s[:, None] * m[1:]
    m_a[:, 1:] = m[:, :-1] * s[None, :]
    ad_m[1:] = s[:, None] * m[:-1]
    m_ad[:, :-1] = m[:, 1:] * s[None, :]
    return eps * (a_m - m_a) + np.conj(eps) * (ad_m - m_ad)


class _Generator:
    """Precomputed pieces of the right-hand side for one config."""

    def __init__(self, config: SimulationConfig):
        self.config = config
        e = config.energies()
        decay, feed = _dissipator_coefficients(config)
        self.diag = -1j * (e[:, None] - e[None, :]) + decay
        self.feed = feed

    def rhs(self, m, t_fs):
        out = self.diag * m
        out[:-1, :-1] += self.feed * m[1:, 1:]
        if self.config.drive.active:
            eps = self.config.drive_amplitude(t_fs)
            if eps != 0:
                out -= 1j * _commutator_drive(m, eps)
        return out

    def sector(self, d):
        """Bidiagonal generator for the elements ``rho_{j+d, j}``."""
        dim = self.config.dim
        j = np.arange(dim - d)
        mat = np.diag(self.diag[j + d, j])
        if dim - d > 1:
            jj = j[:-1]
            mat[jj, jj + 1] = self.feed[jj + d, jj]
        return mat


def liouvillian_rhs(rho, t_fs, config: SimulationConfig) -> np.ndarray:
    """``d rho / dt`` in eV (per internal time unit hbar/eV) at time ``t_fs``."""
    m = _matrix(rho)
    _check_dim(m, config)
    return _Generator(config).rhs(m, t_fs)


class _ExactPropagator:
    """Exact drive-free propagation by sector matrix exponentials."""

    def __init__(self, gen: _Generator):
        self.gen = gen
        self.sectors = [gen.sector(d) for d in range(gen.config.dim)]

    def populations(self, m0, dt):
        return (expm(self.sectors[0] * dt) @ m0.diagonal()).real

    def state(self, m0, dt):
        dim = m0.shape[0]
        out = np.zeros_like(m0)
        for d in range(dim):
            j = np.arange(dim - d)
            prop = expm(self.sectors[d] * dt)
            out[j + d, j] = prop @ m0[j + d, j]
            if d:
                # sector -d has the conjugate generator
                out[j, j + d] = prop.conj() @ m0[j, j + d]
        out[np.diag_indices(dim)] = out.diagonal().real
        return out


def _rk_segment(gen, m, t0_fs, t1_fs, config, t_eval_fs=()):
    """Adaptive DOP853 from t0 to t1 (fs); returns states at t_eval and t1."""
    dim = config.dim
    tau0, tau1 = fs_to_internal(t0_fs), fs_to_internal(t1_fs)

    def f(tau, y):
        return gen.rhs(y.reshape(dim, dim), internal_to_fs(tau)).ravel()

    t_eval = [fs_to_internal(t) for t in t_eval_fs] + [tau1]
    sol = solve_ivp(
        f,
        (tau0, tau1),
        m.ravel(),
        method="DOP853",
        rtol=config.rtol,
        atol=config.atol,
        t_eval=t_eval,
    )
    if sol.status != 0:
        raise IntegratorError(
            f"integration failed between {t0_fs:.6g} and {t1_fs:.6g} fs at t={sol.t[-1] if sol.t.size else tau0:.6g} "
            f"(hbar/eV): {sol.message}; nfev={sol.nfev}"
        )
    states = []
    for y in sol.y.T:
        s = y.reshape(dim, dim)
        states.append(0.5 * (s + s.conj().T))
    return states


def evolve(rho0, config: SimulationConfig, t_grid_fs, store_states: bool = False, n0=None) -> Trajectory:
    """Evolve ``rho0`` and record observables at each time of ``t_grid_fs``.

    ``t_grid_fs[0]`` is the time of ``rho0``.  Raises
    :class:`AccuracyError` if the trace drifts by more than
    ``config.trace_budget`` per fs, and :class:`IntegratorError` if the
    Runge-Kutta stage fails.
    """
    m0 = _matrix(rho0).astype(complex)
    _check_dim(m0, config)
    times = np.asarray(t_grid_fs, dtype=float)
    if times.ndim != 1 or times.size < 1 or np.any(np.diff(times) <= 0):
        raise ValueError("t_grid_fs must be a strictly increasing 1-d array")
    gen = _Generator(config)
    support = config.drive.support_fs()
    exact = None

    pops = np.empty((times.size, config.dim))
    states = [] if store_states else None
    pops[0] = m0.diagonal().real
    if store_states:
        states.append(DensityMatrix(m0))

    ref_state, ref_time = m0, times[0]
    i = 1
    while i < times.size:
        t_prev = times[i - 1]
        if support is not None and ref_time < support[1] and t_prev < support[1] and times[i] > support[0]:
            # driven: integrate up to the end of the pulse window or the grid end
            if ref_time < support[0]:
                if exact is None:
                    exact = _ExactPropagator(gen)
                ref_state = exact.state(ref_state, fs_to_internal(support[0] - ref_time))
                ref_time = support[0]
            stop = min(support[1], times[-1])
            inside = [t for t in times[i:] if t < stop]
            out = _rk_segment(gen, ref_state, ref_time, stop, config, inside)
            for t, s in zip(inside, out[:-1]):
                pops[i] = s.diagonal().real
                if store_states:
                    states.append(DensityMatrix(s))
                i += 1
            ref_state, ref_time = out[-1], stop
            if i < times.size and times[i] == stop:
                pops[i] = ref_state.diagonal().real
                if store_states:
                    states.append(DensityMatrix(ref_state))
                i += 1
            continue
        if exact is None:
            exact = _ExactPropagator(gen)
        dt = fs_to_internal(times[i] - ref_time)
        if store_states:
            s = exact.state(ref_state, dt)
            pops[i] = s.diagonal().real
            states.append(DensityMatrix(s))
        else:
            pops[i] = exact.populations(ref_state, dt)
        i += 1

    if store_states:
        final = states[-1]
    elif times.size == 1 or times[-1] == ref_time:
        final = DensityMatrix(ref_state)
    else:
        if exact is None:
            exact = _ExactPropagator(gen)
        final = DensityMatrix(exact.state(ref_state, fs_to_internal(times[-1] - ref_time)))

    _check_trace(pops, times, m0, config)
    traj = Trajectory(
        times,
        pops,
        n0=n0 if n0 is not None else config.fock_target(),
        states=states,
        final_state=final,
        info={"path": "full", "frame": config.frame},
    )
    return traj


def _check_trace(pops, times, m0, config):
    drift = np.abs(pops.sum(axis=1) - np.trace(m0).real)
    allowed = config.trace_budget * np.maximum(1.0, times - times[0])
    bad = drift > allowed
    if np.any(bad):
        k = int(np.argmax(bad))
        raise AccuracyError(
            f"trace drift {drift[k]:.3g} at t={times[k]:.6g} fs exceeds budget {allowed[k]:.3g}"
        )

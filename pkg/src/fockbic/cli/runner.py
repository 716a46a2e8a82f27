"""Execute parsed scenarios and write their CSV outputs."""

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from itertools import product
from pathlib import Path

import numpy as np

from .. import io
from ..coupling import FanoTwoResonator, QuadraticLoss, TerminatedWaveguide, kappa_of_n
from ..design import ClassifyThresholds, DesignPoint, LossCurve, classify, stable_photon_number
from ..dynamics import evolve, evolve_diagonal, moment_closure_evolve, pump_and_ringdown
from ..errors import ConfigError
from ..observables import husimi, husimi_axes, mean_var
from ..pinem import pinem_spectrum
from .schema import Scenario, expand_sweep

WORKERS_ENV = "FOCKBIC_MAX_WORKERS"
SUMMARY_COLUMNS = ("point", "axis_value", "label", "final_mean_n", "final_var_n",
                   "min_squeezing_db", "t_min_squeezing_fs", "final_fidelity_n0")


def _header(scn: Scenario, extra=()):
    lines = [f"scenario {scn.name} task {scn.task}",
             f"omega_a_eV={scn.omega_a!r} beta={scn.beta!r}"]
    if scn.coupling is not None and not isinstance(scn.coupling, tuple):
        lines.append(f"coupling {scn.coupling!r}")
    return lines + list(extra)


def _summarize(label, times, rec):
    sq = np.where(np.isfinite(rec["squeezing_db"]), rec["squeezing_db"], np.inf)
    k = int(np.argmin(sq))
    return {
        "label": label,
        "final_mean_n": rec["mean_n"][-1],
        "final_var_n": rec["var_n"][-1],
        "min_squeezing_db": rec["squeezing_db"][k],
        "t_min_squeezing_fs": times[k],
        "final_fidelity_n0": rec["fidelity_n0"][-1],
    }


def _write_snapshots(out, label, times, states, want_husimi, points):
    for t, rho in zip(times, states):
        io.write_state(out / f"states_{label}", t, rho)
        if want_husimi:
            mean, var = mean_var(rho)
            r = np.sqrt(max(mean, 0.0)) + 5 * max(var, 0.0) ** 0.25 + 1
            re, im = husimi_axes(-r, r, points, -r, r, points)
            io.write_husimi(out / f"husimi_{label}_t{t:.6g}.csv", husimi(rho, re, im))


def run_evolve(scn: Scenario, out: Path):
    cfg = scn.simulation_config()
    grid = scn.time_grid()
    snaps = scn.options["snapshots_fs"]
    header = _header(scn, [f"dim={cfg.dim} method={scn.options['method']}"])
    rows = []
    if scn.drive:
        d = scn.drive
        traj = pump_and_ringdown(cfg.with_(drive=scn.drive_envelope()), scn.times["horizon_fs"], mode="pulse",
                                 target_mean=d["target_mean"], points=scn.times["points"],
                                 store_states=bool(snaps))
        io.write_trajectory(out / "trajectory_pulse.csv", traj, header)
        if snaps:
            picks = [int(np.argmin(np.abs(traj.times_fs - t))) for t in snaps]
            _write_snapshots(out, "pulse", traj.times_fs[picks], [traj.states[i] for i in picks],
                             scn.options["husimi"], scn.options["husimi_points"])
        return [_summarize("pulse", traj.times_fs, traj.records)]
    if snaps and scn.options["method"] == "diagonal":
        raise ConfigError("snapshots_fs needs method: full")
    snaps = [t for t in snaps if 0 <= t <= grid[-1]]
    for spec in scn.initial:
        rho0 = spec.build(cfg.dim)
        if scn.options["method"] == "diagonal":
            traj = evolve_diagonal(rho0.diagonal(), cfg, grid)
        else:
            traj = evolve(rho0, cfg, grid)
        io.write_trajectory(out / f"trajectory_{spec.label}.csv", traj, header + [f"initial {spec.descriptor}"])
        if snaps:
            # full states only where asked for; the trajectory itself needs populations only
            snap_grid = np.union1d([0.0], snaps)
            st = evolve(rho0, cfg, snap_grid, store_states=True)
            keep = np.isin(snap_grid, snaps)
            _write_snapshots(out, spec.label, snap_grid[keep], [s for s, k in zip(st.states, keep) if k],
                             scn.options["husimi"], scn.options["husimi_points"])
        rows.append(_summarize(spec.label, traj.times_fs, traj.records))
    return rows


def run_closure(scn: Scenario, out: Path):
    cfg = scn.simulation_config(dim=2)
    grid = scn.time_grid()
    means = scn.options["means"]
    if scn.options["means_relative"]:
        n0 = scn.options.get("n0_float")
        if n0 is None:
            raise ConfigError("initial_means_over_n0 needs a quadratic coupling with beta > 0")
        means = [m * n0 for m in means]
    rows = []
    for i, m in enumerate(means):
        mt = moment_closure_evolve(m, m, cfg, grid)
        extra = [f"initial poisson mean {m!r}"] + ([mt.warning_message] if mt.closure_warning else [])
        io.write_moments(out / f"moments_{i:03d}.csv", mt, _header(scn, extra))
        with np.errstate(invalid="ignore"):
            ok = mt.mean > scn.options["min_mean"]
        sq = np.where(ok & np.isfinite(mt.squeezing_db), mt.squeezing_db, np.inf)
        k = int(np.argmin(sq))
        last = int(np.flatnonzero(np.isfinite(mt.mean))[-1])
        rows.append({
            "label": f"mean{m:.6g}",
            "final_mean_n": mt.mean[last],
            "final_var_n": mt.var[last],
            "min_squeezing_db": mt.squeezing_db[k] if np.isfinite(sq[k]) else float("nan"),
            "t_min_squeezing_fs": mt.times_fs[k],
            "final_fidelity_n0": float("nan"),
        })
    return rows


def _move_zero(model, omega0, kappa_i):
    if isinstance(model, QuadraticLoss):
        return replace(model, omega0=omega0, kappa_i=kappa_i)
    if isinstance(model, TerminatedWaveguide):
        return TerminatedWaveguide.with_zero_at(omega0, model.kappa, model.gamma, kappa_i)
    if isinstance(model, FanoTwoResonator):
        return replace(model, omega_d=omega0, kappa_i=kappa_i)
    raise ConfigError(f"loss_curves needs a model with a loss zero, not {type(model).__name__}")


def run_loss_curves(scn: Scenario, out: Path):
    wa, opts = scn.omega_a, scn.options
    n = np.arange(1, opts["n_max"] + 1)
    curves = []
    for d, ki in product(opts["detunings_over_wa"], opts["kappa_i_over_wa"]):
        model = _move_zero(scn.coupling, wa * (1 + d), ki * wa)
        curves.append((d, ki, LossCurve(n, np.asarray(kappa_of_n(model, wa, scn.beta, n), dtype=float))))
    io.write_loss_curves(out / "loss_curves.csv", curves, _header(scn))
    return []


def run_pinem(scn: Scenario, out: Path):
    rows = []
    for spec in scn.initial:
        dim = scn.dim or spec.required_dim()
        rho = spec.build(dim)
        for g in scn.options["g"]:
            s = pinem_spectrum(rho, g, scn.options["k_max"])
            io.write_pinem(out / f"pinem_{spec.label}_g{g:g}.csv", s, spec.descriptor)
    return rows


def run_design_sweep(scn: Scenario, out: Path):
    c2 = scn.coupling[1]
    th = ClassifyThresholds(**scn.options["thresholds"])
    rows = []
    for beta, d, ki in product(scn.options["betas"], scn.options["delta0_over_wa"], scn.options["kappa_i_over_wa"]):
        p = DesignPoint(scn.omega_a, beta, d * scn.omega_a, ki * scn.omega_a, c2)
        rows.append((beta, d, ki, stable_photon_number(p), classify(p, thresholds=th).value))
    io.write_sweep(out / "design_sweep.csv", rows)
    return []


TASK_RUNNERS = {
    "evolve": run_evolve,
    "closure": run_closure,
    "loss_curves": run_loss_curves,
    "pinem": run_pinem,
    "design_sweep": run_design_sweep,
}


def run_scenario(scn: Scenario, out_dir: Path | None = None):
    """Run one scenario (no sweep); returns summary rows."""
    out = Path(out_dir) if out_dir is not None else scn.output_dir / scn.name
    out.mkdir(parents=True, exist_ok=True)
    return TASK_RUNNERS[scn.task](scn, out)


def _point(args):
    scn, out = args
    return run_scenario(scn, out)


def worker_count(requested=None, jobs=1):
    cap = os.environ.get(WORKERS_ENV)
    n = requested or os.cpu_count() or 1
    if cap:
        try:
            n = min(n, max(1, int(cap)))
        except ValueError:
            raise ConfigError(f"{WORKERS_ENV} must be an integer, got {cap!r}") from None
    return max(1, min(n, jobs))


def run_sweep(scn: Scenario, lines=None, out_dir: Path | None = None, workers=None):
    """Fan the scenario over its sweep axis; points run in parallel, merging is serial."""
    points = expand_sweep(scn, lines)
    out = Path(out_dir) if out_dir is not None else scn.output_dir / scn.name
    jobs = [(p, out / f"point_{i:03d}") for i, p in enumerate(points)]
    n = worker_count(workers, len(jobs))
    if n == 1:
        results = [_point(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=n) as pool:
            results = list(pool.map(_point, jobs))
    rows = []
    for i, (value, res) in enumerate(zip(scn.sweep["values"], results)):
        for r in res:
            rows.append((i, value, *(r[c] for c in SUMMARY_COLUMNS[2:])))
    io.write_table(out / "sweep_summary.csv", SUMMARY_COLUMNS, rows,
                   [f"scenario {scn.name} sweep over {scn.sweep['axis']}"])
    return rows


def run(scn: Scenario, lines=None, out_dir=None, workers=None):
    if scn.sweep:
        return run_sweep(scn, lines, out_dir, workers)
    return run_scenario(scn, out_dir)

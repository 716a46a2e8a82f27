"""Command-line front end: ``fockbic run|loss-profile|evolve|design|pinem|sweep``.

Exit codes: 0 success, 2 configuration error, 3 accuracy or integrator failure.
"""

import argparse
import sys
from importlib import resources
from pathlib import Path

import numpy as np
import yaml

from .. import io
from ..coupling import Constant, FanoTwoResonator, TerminatedWaveguide, loss_imag, q_factor
from ..design import DesignPoint, classify, detuning_for_fock, stable_photon_number
from ..errors import AccuracyError, ConfigError, IntegratorError, TruncationError
from ..pinem import pinem_spectrum
from .runner import run, worker_count
from .schema import SchemaError, expand_sweep, load_scenario, load_yaml, parse_scenario, parse_state

EXIT_OK, EXIT_CONFIG, EXIT_ACCURACY = 0, 2, 3


def preset_names():
    root = resources.files(__package__) / "presets"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".yaml"))


def preset_path(name) -> Path:
    p = resources.files(__package__) / "presets" / f"{name}.yaml"
    if not p.is_file():
        raise ConfigError(f"unknown preset {name!r}; available: {', '.join(preset_names())}")
    return Path(str(p))


def _resolve(target):
    path = Path(target)
    if path.suffix in (".yaml", ".yml") or path.exists():
        return load_scenario(path)
    return load_scenario(preset_path(target))


def _override(scn, lines, **changes):
    """Re-validate the scenario with some raw fields replaced."""
    data = dict(scn.raw)
    for k, v in changes.items():
        if v is not None:
            data[k] = v
    return parse_scenario(data, lines, scn.source, str(Path(scn.source).parent) if scn.source else ".")


def cmd_run(args):
    scn, lines = _resolve(args.scenario)
    out = Path(args.out) if args.out else None
    rows = run(scn, lines, out, args.workers)
    dest = out or scn.output_dir / scn.name
    print(f"{scn.name}: wrote outputs to {dest}")
    for r in rows if isinstance(rows, list) else []:
        if isinstance(r, dict):
            print(f"  {r['label']}: final mean {r['final_mean_n']:.6g}, min squeezing {r['min_squeezing_db']:.3f} dB, "
                  f"final fidelity {r['final_fidelity_n0']:.6g}")
    return EXIT_OK


def cmd_evolve(args):
    if bool(args.preset) == bool(args.scenario):
        raise ConfigError("evolve needs exactly one of --preset or --scenario")
    scn, lines = _resolve(args.scenario or args.preset)
    if scn.task != "evolve":
        raise ConfigError(f"scenario {scn.name!r} is a {scn.task} task, not evolve")
    times = dict(scn.raw.get("times", {}))
    if args.horizon_fs:
        times["horizon_fs"] = args.horizon_fs
    scn = _override(
        scn, lines,
        initial=[f"coherent:{args.preload:g}"] if args.preload is not None else None,
        method=args.method,
        times=times,
    )
    out = Path(args.out) if args.out else scn.output_dir / scn.name
    rows = run(scn, lines, out)
    for r in rows:
        print(f"{r['label']}: t_end mean_n={r['final_mean_n']:.6g} var_n={r['final_var_n']:.6g} "
              f"fidelity_n0={r['final_fidelity_n0']:.6g} (trajectory in {out})")
    return EXIT_OK


def cmd_design(args):
    wa = args.omega_a
    if args.target_fock is not None:
        if args.target_fock < 1:
            raise ConfigError("--target-fock must be >= 1")
        d = detuning_for_fock(args.target_fock, wa, args.beta)
        print(f"delta0 = {d / wa:.6g} omega_a ({d:.6g} eV at omega_a = {wa:g} eV)")
        return EXIT_OK
    p = DesignPoint(wa, args.beta, args.delta0_over_wa * wa, args.kappa_i_over_wa * wa,
                    args.kappa_over_wa / (args.gamma_over_wa**2 * wa))
    n0 = stable_photon_number(p)
    print(f"n0 = {n0:.6g}")
    print(f"class = {classify(p).value}")
    return EXIT_OK


def cmd_pinem(args):
    try:
        spec = parse_state(args.state)
    except ValueError as exc:
        raise ConfigError(f"--state: {exc}") from None
    try:
        g = complex(args.g.replace(" ", ""))
    except ValueError:
        raise ConfigError(f"--g: not a number: {args.g!r}") from None
    dim = args.dim or spec.required_dim()
    s = pinem_spectrum(spec.build(dim), g, args.k_max)
    out = Path(args.out or f"pinem_{spec.label}_g{abs(g):g}.csv")
    io.write_pinem(out, s, spec.descriptor)
    print(f"{out}: sum P_k = {s.total:.12f}, P(0) = {s.at(0):.6g}")
    return EXIT_OK


def cmd_loss_profile(args):
    wa = args.omega_a
    kappa, gamma, ki = args.kappa_over_wa * wa, args.gamma_over_wa * wa, args.kappa_i_over_wa * wa
    omega0 = wa * (1 + args.delta0_over_wa)
    if args.model == "waveguide":
        model = TerminatedWaveguide.with_zero_at(omega0, kappa, gamma, ki)
    elif args.model == "fano":
        model = FanoTwoResonator(kappa, gamma, omega0, ki)
    else:
        model = Constant(kappa, ki)
    w = np.linspace(omega0 - args.span * gamma, omega0 + args.span * gamma, args.points)
    cols = {"kc2_eV": model.kc2(w), "re_kl_eV": model.loss_real(w)}
    if args.imag:
        cols["im_kl_eV"] = loss_imag(model, w)
    cols["inv_q"] = 1.0 / q_factor(model, w)
    out = Path(args.out or f"loss_profile_{args.model}.csv")
    io.write_loss_profile(out, model, w, cols)
    print(f"{out}: {args.points} points, min Re K_l = {np.min(cols['re_kl_eV']):.6g} eV")
    return EXIT_OK


def cmd_sweep(args):
    scn, lines = _resolve(args.scenario)
    values = yaml.safe_load("[" + args.values + "]") if args.values else None
    if args.axis or values:
        if not (args.axis and values):
            raise ConfigError("--axis and --values go together")
        data = dict(scn.raw, sweep={"axis": args.axis, "values": values})
        scn = parse_scenario(data, lines, scn.source, str(Path(scn.source).parent))
    if not scn.sweep:
        raise ConfigError(f"scenario {scn.name!r} has no sweep section; pass --axis and --values")
    expand_sweep(scn, lines)
    out = Path(args.out) if args.out else None
    n = worker_count(args.workers, len(scn.sweep["values"]))
    rows = run(scn, lines, out, args.workers)
    print(f"{scn.name}: {len(scn.sweep['values'])} points on {n} worker(s), {len(rows)} summary rows "
          f"in {(out or scn.output_dir / scn.name) / 'sweep_summary.csv'}")
    return EXIT_OK


def build_parser():
    ap = argparse.ArgumentParser(prog="fockbic", description="Nonlinear-loss resonators and photon-number BICs.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run a scenario file or preset")
    p.add_argument("scenario", help="YAML scenario path or preset name")
    p.add_argument("--out", help="output directory (default: <output_dir>/<name>)")
    p.add_argument("--workers", type=int, help="parallel workers for sweeps")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("evolve", help="evolve an initial state and write the trajectory")
    p.add_argument("--preset")
    p.add_argument("--scenario")
    p.add_argument("--preload", type=float, help="start from a coherent state with this mean")
    p.add_argument("--method", choices=("full", "diagonal"))
    p.add_argument("--horizon-fs", type=float)
    p.add_argument("--out")
    p.set_defaults(func=cmd_evolve)

    p = sub.add_parser("design", help="detuning for a Fock order, or n0 and regime of a design point")
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--omega-a", type=float, default=1.47, help="eV (default 1.47)")
    p.add_argument("--target-fock", type=int)
    p.add_argument("--delta0-over-wa", type=float, default=0.0)
    p.add_argument("--kappa-over-wa", type=float, default=1e-3)
    p.add_argument("--gamma-over-wa", type=float, default=1e-2)
    p.add_argument("--kappa-i-over-wa", type=float, default=0.0)
    p.set_defaults(func=cmd_design)

    p = sub.add_parser("pinem", help="electron energy spectrum after one interaction")
    p.add_argument("--state", required=True, help="vacuum, fock:N, coherent:MEAN or poisson:MEAN")
    p.add_argument("--g", required=True, help="coupling, real or complex (e.g. 0.1 or 0.1+0.05j)")
    p.add_argument("--k-max", type=int)
    p.add_argument("--dim", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_pinem)

    p = sub.add_parser("loss-profile", help="frequency-resolved loss of a coupling model")
    p.add_argument("--model", choices=("waveguide", "fano", "constant"), default="waveguide")
    p.add_argument("--omega-a", type=float, default=1.47)
    p.add_argument("--kappa-over-wa", type=float, default=1e-3)
    p.add_argument("--gamma-over-wa", type=float, default=1e-2)
    p.add_argument("--delta0-over-wa", type=float, default=0.0, help="loss zero offset from omega_a")
    p.add_argument("--kappa-i-over-wa", type=float, default=0.0)
    p.add_argument("--span", type=float, default=2.0, help="half width in units of gamma")
    p.add_argument("--points", type=int, default=401)
    p.add_argument("--imag", action="store_true", help="also compute Im K_l by principal value")
    p.add_argument("--out")
    p.set_defaults(func=cmd_loss_profile)

    p = sub.add_parser("sweep", help="fan a scenario over one axis in parallel")
    p.add_argument("scenario")
    p.add_argument("--axis", help="dotted field path, e.g. coupling.q_i")
    p.add_argument("--values", help="comma-separated values")
    p.add_argument("--workers", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_sweep)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, yaml.YAMLError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (AccuracyError, IntegratorError, TruncationError) as exc:
        print(f"accuracy failure: {exc}", file=sys.stderr)
        return EXIT_ACCURACY


__all__ = ["main", "build_parser", "preset_names", "preset_path", "SchemaError", "load_yaml"]

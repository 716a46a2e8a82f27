"""Plain-text writers for trajectories, states, Husimi grids, spectra and sweeps."""

import csv
from pathlib import Path

import numpy as np

TRAJECTORY_COLUMNS = ("t_fs", "mean_n", "var_n", "squeezing_db", "g2", "fidelity_n0", "trace_defect")
SWEEP_COLUMNS = ("beta", "delta0_over_wa", "kappa_i_over_wa", "n0", "class")


def _fmt(x) -> str:
    if isinstance(x, str):
        return x
    if x is None:
        return "nan"
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    return repr(float(x))


def _write_rows(path, header_lines, columns, rows):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        for line in header_lines:
            fh.write(f"# {line}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([_fmt(v) for v in row])
    return path


def write_trajectory(path, traj, header_lines=()):
    rec = traj.records
    rows = zip(traj.times_fs, *(rec[c] for c in TRAJECTORY_COLUMNS[1:]))
    return _write_rows(path, header_lines, TRAJECTORY_COLUMNS, rows)


def write_moments(path, mt, header_lines=()):
    rows = zip(mt.times_fs, mt.mean, mt.var, mt.squeezing_db)
    return _write_rows(path, header_lines, ("t_fs", "mean_n", "var_n", "squeezing_db"), rows)


def read_trajectory(path) -> dict:
    """Read a trajectory CSV back into column arrays."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(line for line in fh if not line.startswith("#")))
    names, values = rows[0], np.array(rows[1:], dtype=float).reshape(-1, len(rows[0]))
    return {name: values[:, i] for i, name in enumerate(names)}


def write_state(directory, t_fs, rho):
    """Snapshot ``state_t<fs>.dat``: one row per matrix row, ``re im`` pairs."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    m = rho.matrix if hasattr(rho, "matrix") else np.asarray(rho)
    path = directory / f"state_t{t_fs:.6g}.dat"
    pairs = np.empty((m.shape[0], 2 * m.shape[1]))
    pairs[:, 0::2] = m.real
    pairs[:, 1::2] = m.imag
    np.savetxt(path, pairs, fmt="%.17g", header=f"dim {m.shape[0]} t_fs {t_fs!r} (re im pairs, row-major)")
    return path


def read_state(path) -> np.ndarray:
    pairs = np.atleast_2d(np.loadtxt(path))
    return pairs[:, 0::2] + 1j * pairs[:, 1::2]


def write_husimi(path, grid):
    """Q values as a matrix (rows: Im alpha ascending, columns: Re alpha ascending).

    Two header lines give ``min,max,count`` for the real and imaginary axes.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    re, im = grid.re, grid.im
    with path.open("w") as fh:
        fh.write(f"# re {float(re[0])!r},{float(re[-1])!r},{re.size}\n")
        fh.write(f"# im {float(im[0])!r},{float(im[-1])!r},{im.size}\n")
        for row in grid.values:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")
    return path


def read_husimi(path):
    """Return ``(re_axis, im_axis, values)`` from a file written by :func:`write_husimi`."""
    with open(path) as fh:
        axes = []
        for _ in range(2):
            lo, hi, n = fh.readline().split(None, 2)[2].split(",")
            axes.append(np.linspace(float(lo), float(hi), int(n)))
        values = np.loadtxt(fh, delimiter=",", ndmin=2)
    return axes[0], axes[1], values


def write_pinem(path, spectrum, state_label: str):
    g = spectrum.g
    header = [f"g={g.real!r}{'+' if g.imag >= 0 else '-'}{abs(g.imag)!r}j state={state_label}"]
    return _write_rows(path, header, ("k", "P_k"), zip(spectrum.k.tolist(), spectrum.probabilities))


LOSS_CURVE_COLUMNS = ("delta0_over_wa", "kappa_i_over_wa", "n", "kappa_eV")


def write_loss_curves(path, curves, header_lines=()):
    """``curves``: iterable of ``(delta0_over_wa, kappa_i_over_wa, LossCurve)``."""
    rows = ((d, ki, int(n), k) for d, ki, c in curves for n, k in zip(c.n, c.kappa))
    return _write_rows(path, header_lines, LOSS_CURVE_COLUMNS, rows)


def write_loss_profile(path, model, omega, values_by_column):
    cols = ("omega_eV", *values_by_column.keys())
    rows = zip(omega, *values_by_column.values())
    return _write_rows(path, (f"model {type(model).__name__}",), cols, rows)


def write_sweep(path, rows, header_lines=()):
    return _write_rows(path, header_lines, SWEEP_COLUMNS, rows)


def write_table(path, columns, rows, header_lines=()):
    return _write_rows(path, header_lines, columns, rows)

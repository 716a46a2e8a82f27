"""Scenario files: YAML with a versioned schema and line-aware diagnostics.

A scenario is a mapping with these top-level keys::

    schema_version: 1          # required
    name: fock10               # required, used for the output directory
    task: evolve               # evolve | closure | loss_curves | pinem | design_sweep
    resonator: {omega_a_eV: 1.47, beta: 5.0e-6}
    coupling:  {model: quadratic, kappa_over_wa: 1e-3, gamma_over_wa: 1e-2, n0: 10}
    dim: 100                   # optional for evolve/closure; inferred from the states
    initial: [coherent:50]     # states: vacuum, fock:N, coherent:MEAN, poisson:MEAN
    times: {horizon_fs: 1e9, points: 200, first_fs: 1.0, spacing: log}
    output_dir: out            # relative to the working directory
    sweep: {axis: coupling.kappa_i_over_wa, values: [0, 1e-7]}

Rates accept ``<name>_eV`` or ``<name>_over_wa``; the background loss also
accepts ``q_i`` (``kappa_i = omega_a / (2 q_i)``).  The loss zero is set by
one of ``omega0_eV``, ``delta0_eV``, ``delta0_over_wa``, ``delta0_over_gamma``
or ``n0``.  See README for the per-task keys.
"""

import copy
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from ..coupling import Constant, FanoTwoResonator, QuadraticLoss, Tabulated, TerminatedWaveguide
from ..dynamics import DriveEnvelope, SimulationConfig
from ..errors import ConfigError
from ..fockspace import coherent_state, fock_state, poisson_state, truncation_dim
from ..units import HBAR_EV_FS

SCHEMA_VERSION = 1
TASKS = ("evolve", "closure", "loss_curves", "pinem", "design_sweep")
MODELS = ("constant", "waveguide", "fano", "quadratic", "tabulated")
TAIL_TOL = 1e-10


class SchemaError(ConfigError):
    def __init__(self, path: str, message: str, line: int | None = None, source: str | None = None):
        self.path, self.line, self.source = path, line, source
        where = f"{source or '<scenario>'}:{line}" if line else (source or "<scenario>")
        super().__init__(f"{where}: {path or '<root>'}: {message}")


def _line_map(node, prefix=(), out=None):
    out = {} if out is None else out
    if isinstance(node, yaml.MappingNode):
        for k, v in node.value:
            key = prefix + (str(k.value),)
            out[key] = k.start_mark.line + 1
            _line_map(v, key, out)
    elif isinstance(node, yaml.SequenceNode):
        for i, v in enumerate(node.value):
            key = prefix + (str(i),)
            out[key] = v.start_mark.line + 1
            _line_map(v, key, out)
    return out


def load_yaml(text: str, source: str | None = None):
    """Parse YAML, returning the data and a ``path tuple -> line`` map."""
    try:
        node = yaml.compose(text, Loader=yaml.SafeLoader)
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise SchemaError("", f"YAML syntax error: {getattr(exc, 'problem', exc)}",
                          mark.line + 1 if mark else None, source) from None
    return data, (_line_map(node) if node is not None else {})


class _Section:
    """Typed access to a mapping with diagnostics that name the field and line."""

    def __init__(self, data, path, ctx):
        self.data, self.path, self.ctx = data, path, ctx
        self.used = set()
        if not isinstance(data, dict):
            self.fail(None, "expected a mapping")

    def _key_path(self, key):
        return self.path + ((key,) if key is not None else ())

    def fail(self, key, message):
        p = self._key_path(key)
        lines = self.ctx["lines"]
        line = lines.get(p) or lines.get(self.path)
        raise SchemaError(".".join(p), message, line, self.ctx["source"])

    def has(self, key):
        return key in self.data

    def raw(self, key, default=None):
        self.used.add(key)
        return self.data.get(key, default)

    def number(self, key, default=None, *, required=False, positive=False, nonneg=False):
        if key not in self.data:
            if required:
                self.fail(None, f"missing required field {key!r}")
            return default
        self.used.add(key)
        v = self.data[key]
        if isinstance(v, str):
            try:
                v = float(v)
            except ValueError:
                self.fail(key, f"expected a number, got {v!r}")
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not np.isfinite(v):
            self.fail(key, f"expected a finite number, got {v!r}")
        if positive and v <= 0:
            self.fail(key, "must be > 0")
        if nonneg and v < 0:
            self.fail(key, "must be >= 0")
        return float(v)

    def integer(self, key, default=None, *, required=False, minimum=None):
        v = self.number(key, default, required=required)
        if v is None:
            return None
        if v != int(v):
            self.fail(key, f"expected an integer, got {v!r}")
        if minimum is not None and v < minimum:
            self.fail(key, f"must be >= {minimum}")
        return int(v)

    def string(self, key, default=None, *, required=False, choices=None):
        if key not in self.data:
            if required:
                self.fail(None, f"missing required field {key!r}")
            return default
        self.used.add(key)
        v = self.data[key]
        if not isinstance(v, str):
            self.fail(key, f"expected a string, got {v!r}")
        if choices and v not in choices:
            self.fail(key, f"must be one of {', '.join(choices)}; got {v!r}")
        return v

    def numbers(self, key, default=None, *, required=False):
        if key not in self.data:
            if required:
                self.fail(None, f"missing required field {key!r}")
            return default
        self.used.add(key)
        v = self.data[key]
        if not isinstance(v, list) or not v:
            self.fail(key, "expected a non-empty list of numbers")
        sub = _Section({str(i): x for i, x in enumerate(v)}, self._key_path(key), self.ctx)
        return [sub.number(str(i)) for i in range(len(v))]

    def section(self, key, *, required=True):
        if key not in self.data:
            if required:
                self.fail(None, f"missing required section {key!r}")
            return None
        self.used.add(key)
        return _Section(self.data[key], self._key_path(key), self.ctx)

    def one_of(self, keys):
        present = [k for k in keys if k in self.data]
        if len(present) > 1:
            self.fail(present[1], f"conflicts with {present[0]!r}; give only one of {', '.join(keys)}")
        return present[0] if present else None

    def finish(self):
        extra = sorted(set(self.data) - self.used)
        if extra:
            self.fail(extra[0], "unknown field")


def _rate(sec: _Section, base: str, omega_a: float, default=None, *, allow_q=False):
    keys = [f"{base}_eV", f"{base}_over_wa"] + (["q_i"] if allow_q else [])
    key = sec.one_of(keys)
    if key is None:
        if default is None:
            sec.fail(None, f"missing {base} (give one of {', '.join(keys)})")
        return default
    if key == "q_i":
        return omega_a / (2 * sec.number(key, positive=True))
    v = sec.number(key, nonneg=True)
    return v if key.endswith("_eV") else v * omega_a


@dataclass(frozen=True)
class StateSpec:
    kind: str
    value: float = 0.0

    @property
    def label(self):
        if self.kind == "vacuum":
            return "vacuum"
        v = int(self.value) if self.value == int(self.value) else self.value
        return f"{self.kind}{v}"

    @property
    def descriptor(self):
        return "vacuum" if self.kind == "vacuum" else f"{self.kind}:{self.value:g}"

    def required_dim(self):
        if self.kind == "fock":
            return int(self.value) + 2
        if self.kind in ("coherent", "poisson"):
            return truncation_dim(self.value, TAIL_TOL) + 1
        return 2

    def build(self, dim):
        if self.kind == "vacuum":
            return fock_state(0, dim)
        if self.kind == "fock":
            return fock_state(int(self.value), dim)
        if self.kind == "coherent":
            return coherent_state(self.value, 0.0, dim, tail_tol=TAIL_TOL)
        return poisson_state(self.value, dim, tail_tol=TAIL_TOL)


def parse_state(text) -> StateSpec:
    """``vacuum``, ``fock:N``, ``coherent:MEAN`` or ``poisson:MEAN``."""
    if not isinstance(text, str):
        raise ValueError(f"state must be a string like 'coherent:50', got {text!r}")
    kind, _, arg = text.strip().partition(":")
    kind = kind.lower()
    if kind == "vacuum" and not arg:
        return StateSpec("vacuum")
    if kind not in ("fock", "coherent", "poisson"):
        raise ValueError(f"unknown state kind {kind!r} (vacuum, fock:N, coherent:MEAN, poisson:MEAN)")
    try:
        value = float(arg)
    except ValueError:
        raise ValueError(f"state {text!r} needs a numeric argument") from None
    if value < 0 or (kind == "fock" and value != int(value)):
        raise ValueError(f"invalid state argument in {text!r}")
    return StateSpec(kind, value)


@dataclass(frozen=True)
class Scenario:
    name: str
    task: str
    omega_a: float
    beta: float
    coupling: object
    gamma: float | None
    dim: int | None
    initial: tuple
    times: dict
    drive: dict | None
    options: dict
    output_dir: Path
    sweep: dict | None = None
    raw: dict = field(default_factory=dict, repr=False, compare=False)
    source: str | None = None

    def simulation_config(self, dim=None, **changes) -> SimulationConfig:
        d = dim or self.dim or self.auto_dim()
        cfg = SimulationConfig(self.omega_a, self.beta, self.coupling, d, n0=self.options.get("n0_record"))
        return cfg.with_(**changes) if changes else cfg

    def auto_dim(self):
        need = [s.required_dim() for s in self.initial] or [2]
        n0 = self.options.get("n0_record")
        if n0 is not None:
            need.append(n0 + 2)
        return max(need)

    def time_grid(self):
        t = self.times
        if t["spacing"] == "log":
            offs = np.geomspace(t["first_fs"], t["horizon_fs"], t["points"] - 1)
            return np.concatenate([[0.0], offs])
        return np.linspace(0.0, t["horizon_fs"], t["points"])

    def drive_envelope(self) -> DriveEnvelope:
        if not self.drive:
            return DriveEnvelope()
        d = self.drive
        return DriveEnvelope.gaussian(d["amplitude"], d["center_fs"], d["duration_fs"])


def _parse_coupling(sec: _Section, omega_a, beta):
    model = sec.string("model", required=True, choices=MODELS)
    kappa_i = _rate(sec, "kappa_i", omega_a, 0.0, allow_q=True)
    if model == "tabulated":
        path = sec.string("file", required=True)
        base = Path(sec.ctx["base_dir"])
        try:
            out = Tabulated.from_file(base / path, kappa_i=kappa_i)
        except (OSError, ValueError) as exc:
            sec.fail("file", str(exc))
        sec.finish()
        return out, None
    kappa = _rate(sec, "kappa", omega_a)
    if model == "constant":
        sec.finish()
        return Constant(kappa, kappa_i), None
    gamma = _rate(sec, "gamma", omega_a)
    if gamma <= 0:
        sec.fail("gamma_over_wa" if sec.has("gamma_over_wa") else "gamma_eV", "must be > 0")

    zkey = sec.one_of(["omega0_eV", "delta0_eV", "delta0_over_wa", "delta0_over_gamma", "n0"])
    if zkey is None:
        sec.fail(None, "missing loss-zero position (omega0_eV, delta0_eV, delta0_over_wa, delta0_over_gamma or n0)")
    v = sec.number(zkey)
    if zkey == "omega0_eV":
        omega0 = v
    elif zkey == "delta0_eV":
        omega0 = omega_a + v
    elif zkey == "delta0_over_wa":
        omega0 = omega_a * (1 + v)
    elif zkey == "delta0_over_gamma":
        omega0 = omega_a + v * gamma
    else:
        if beta <= 0:
            sec.fail("n0", "placing the loss zero by photon number needs resonator.beta > 0")
        if v < 1:
            sec.fail("n0", "must be >= 1")
        omega0 = omega_a + 2 * beta * omega_a * (v - 1)
    try:
        if model == "waveguide":
            out = TerminatedWaveguide.with_zero_at(omega0, kappa, gamma, kappa_i)
        elif model == "fano":
            out = FanoTwoResonator(kappa, gamma, omega0, kappa_i)
        else:
            out = QuadraticLoss.from_waveguide(omega0, kappa, gamma, kappa_i)
    except ValueError as exc:
        sec.fail(None, str(exc))
    sec.finish()
    return out, gamma


def _parse_states(sec: _Section, key, *, required):
    raw = sec.raw(key)
    if raw is None:
        if required:
            sec.fail(None, f"missing required field {key!r}")
        return ()
    items = raw if isinstance(raw, list) else [raw]
    out = []
    for i, item in enumerate(items):
        try:
            out.append(parse_state(item))
        except ValueError as exc:
            p = sec.path + (key,) + ((str(i),) if isinstance(raw, list) else ())
            raise SchemaError(".".join(p), str(exc), sec.ctx["lines"].get(p), sec.ctx["source"]) from None
    return tuple(out)


def _parse_times(sec):
    if sec is None:
        return None
    spacing = sec.string("spacing", "log", choices=("log", "linear"))
    t = {
        "horizon_fs": sec.number("horizon_fs", required=True, positive=True),
        "points": sec.integer("points", 200, minimum=3),
        "first_fs": sec.number("first_fs", 1.0, positive=True),
        "spacing": spacing,
    }
    if spacing == "log" and t["first_fs"] >= t["horizon_fs"]:
        sec.fail("first_fs", "must be below horizon_fs")
    sec.finish()
    return t


def _task_options(task, root: _Section, omega_a, gamma):
    opts = {}
    if task == "evolve":
        opts["method"] = root.string("method", "full", choices=("full", "diagonal"))
        snaps = root.numbers("snapshots_fs", [])
        opts["snapshots_fs"] = sorted(set(snaps))
        opts["husimi"] = bool(root.raw("husimi", False))
        opts["husimi_points"] = root.integer("husimi_points", 81, minimum=3)
    elif task == "closure":
        key = root.one_of(["initial_means", "initial_means_over_n0"])
        if key is None:
            root.fail(None, "closure needs initial_means or initial_means_over_n0")
        opts["means"] = root.numbers(key)
        opts["means_relative"] = key == "initial_means_over_n0"
        opts["min_mean"] = root.number("min_mean", 0.0, nonneg=True)
    elif task == "loss_curves":
        key = root.one_of(["detunings_over_gamma", "detunings_over_wa"])
        if key is None:
            root.fail(None, "loss_curves needs detunings_over_gamma or detunings_over_wa")
        vals = root.numbers(key)
        if key == "detunings_over_gamma":
            if gamma is None:
                root.fail(key, "detunings_over_gamma needs a coupling with gamma")
            vals = [v * gamma / omega_a for v in vals]
        opts["detunings_over_wa"] = vals
        opts["kappa_i_over_wa"] = root.numbers("kappa_i_over_wa", [0.0])
        opts["n_max"] = root.integer("n_max", 60, minimum=1)
    elif task == "pinem":
        opts["g"] = root.numbers("g", required=True)
        opts["k_max"] = root.integer("k_max", None, minimum=1)
    elif task == "design_sweep":
        opts["betas"] = root.numbers("betas", required=True)
        opts["delta0_over_wa"] = root.numbers("delta0_over_wa", required=True)
        opts["kappa_i_over_wa"] = root.numbers("kappa_i_over_wa", [0.0])
        th = root.section("thresholds", required=False)
        opts["thresholds"] = {}
        if th is not None:
            for k in ("integrality", "contrast", "probe_factor"):
                if th.has(k):
                    opts["thresholds"][k] = th.number(k, positive=True)
            th.finish()
    return opts


def _parse_drive(sec):
    if sec is None:
        return None
    d = {
        "duration_fs": sec.number("duration_fs", required=True, positive=True),
        "center_fs": sec.number("center_fs", None),
        "amplitude": sec.number("amplitude_per_fs", 1.0, positive=True),
        "target_mean": sec.number("target_mean", None, positive=True),
    }
    if d["center_fs"] is None:
        d["center_fs"] = 4 * d["duration_fs"]
    # envelope amplitudes are rates (eV); the file takes 1/fs
    d["amplitude"] = d["amplitude"] * HBAR_EV_FS
    sec.finish()
    return d


def parse_scenario(data, lines=None, source=None, base_dir=".") -> Scenario:
    ctx = {"lines": lines or {}, "source": source, "base_dir": base_dir}
    root = _Section(data, (), ctx)
    version = root.raw("schema_version")
    if version is None:
        root.fail(None, "missing required field 'schema_version'")
    if version != SCHEMA_VERSION:
        root.fail("schema_version", f"unsupported schema_version {version!r} (this build reads {SCHEMA_VERSION})")
    name = root.string("name", required=True)
    task = root.string("task", required=True, choices=TASKS)

    res = root.section("resonator")
    omega_a = res.number("omega_a_eV", required=True, positive=True)
    beta_key = res.one_of(["beta", "beta_eV"])
    if beta_key is None:
        res.fail(None, "missing required field 'beta'")
    beta = res.number(beta_key, nonneg=True)
    if beta_key == "beta_eV":
        beta = beta / omega_a
    res.finish()

    coupling, gamma = (None, None)
    if task in ("evolve", "closure", "loss_curves"):
        coupling, gamma = _parse_coupling(root.section("coupling"), omega_a, beta)
    elif task == "design_sweep":
        sec = root.section("coupling")
        kappa = _rate(sec, "kappa", omega_a)
        gamma = _rate(sec, "gamma", omega_a)
        if gamma <= 0:
            sec.fail(None, "gamma must be > 0")
        sec.finish()
        coupling = ("curvature", kappa / gamma**2)

    dim = root.integer("dim", None, minimum=2)
    drive = _parse_drive(root.section("drive", required=False))
    if drive is not None and task != "evolve":
        root.fail("drive", "a drive is only used by the evolve task")
    if drive is not None and root.has("initial"):
        root.fail("initial", "a driven run starts from vacuum; drop 'initial' or the drive")
    needs_states = task == "pinem" or (task == "evolve" and drive is None)
    initial = _parse_states(root, "initial", required=needs_states)
    times = _parse_times(root.section("times", required=task in ("evolve", "closure")))
    options = _task_options(task, root, omega_a, gamma)
    if isinstance(coupling, QuadraticLoss) and beta > 0:
        n0 = (coupling.omega0 - omega_a) / (2 * beta * omega_a) + 1
        options["n0_float"] = n0
        if n0 >= 0:
            options["n0_record"] = int(round(n0))
    if dim is not None:
        for i, s in enumerate(initial):
            if s.kind == "fock" and s.value >= dim:
                root.fail("initial", f"state {s.descriptor} does not fit in dim={dim}")
    out_dir = Path(root.string("output_dir", "out"))

    sweep = None
    sw = root.section("sweep", required=False)
    if sw is not None:
        axis = sw.string("axis", required=True)
        values = sw.raw("values")
        if not isinstance(values, list) or not values:
            sw.fail("values", "expected a non-empty list")
        if task not in ("evolve", "closure"):
            sw.fail(None, f"sweeps are supported for evolve and closure tasks, not {task}")
        sweep = {"axis": axis, "values": values}
        sw.finish()
    root.finish()
    return Scenario(name, task, omega_a, beta, coupling, gamma, dim, initial, times, drive, options,
                    out_dir, sweep, raw=data, source=source)


def set_path(data: dict, dotted: str, value):
    """Copy of ``data`` with ``dotted`` (e.g. ``coupling.q_i``) set to ``value``."""
    out = copy.deepcopy(data)
    node = out
    parts = dotted.split(".")
    for p in parts[:-1]:
        if not isinstance(node, dict) or p not in node:
            raise SchemaError(dotted, f"sweep axis refers to missing section {p!r}")
        node = node[p]
    if not isinstance(node, dict):
        raise SchemaError(dotted, "sweep axis must name a mapping field")
    node[parts[-1]] = value
    return out


def expand_sweep(scn: Scenario, lines=None):
    """One scenario per sweep value (without the sweep section), validated up front."""
    base = copy.deepcopy(scn.raw)
    base.pop("sweep", None)
    out = []
    for v in scn.sweep["values"]:
        data = set_path(base, scn.sweep["axis"], v)
        try:
            out.append(parse_scenario(data, lines, scn.source, _base_dir(scn)))
        except SchemaError as exc:
            raise SchemaError(exc.path, f"{exc} (sweep value {v!r})", exc.line, scn.source) from None
    return out


def _base_dir(scn):
    return str(Path(scn.source).parent) if scn.source else "."


def load_scenario(path) -> tuple[Scenario, dict]:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read scenario {path}: {exc}") from None
    data, lines = load_yaml(text, str(path))
    if data is None:
        raise SchemaError("", "empty scenario file", None, str(path))
    return parse_scenario(data, lines, str(path), str(path.parent)), lines

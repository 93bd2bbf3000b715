"""Run configuration, built-in scenario catalogue, and output emission.

Configs are TOML with strict key checking (typos and unknown keys are hard
errors, never silent defaults).  A run produces a diagnostics CSV, field
snapshots, optional SVG plots, and a JSON report that lists every
certificate as pass/fail/not-applicable plus headline numbers; the report
is written even when the run aborts.
"""

from __future__ import annotations

import dataclasses
import json
import math
import os
import sys
from dataclasses import dataclass, field as dc_field
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:
    import tomli as tomllib

from . import mms as mms_mod
from .diagnostics import (
    DiagnosticsCollector,
    equilibrium_value,
    write_records_csv,
)
from .grid import Grid, integrate, make_field, make_grid, read_snapshot, write_snapshot
from .kinetics import (
    DEFAULT_WORKING_RANGE,
    ExponentialMotility,
    HillIntake,
    LinearIntake,
    PowerLawMotility,
    RationalMotility,
    TabulatedIntake,
    TabulatedMotility,
    validate_assumptions,
)
from .stepper import SimulationAbort, SolverConfig, State, init_state, run
from .svgplot import write_timeseries_svg

__all__ = [
    "ConfigError",
    "RunConfig",
    "ScenarioReport",
    "parse_config",
    "parse_config_file",
    "scenario_names",
    "scenario_config_text",
    "run_scenario",
    "emit_timeseries_csv",
    "emit_snapshot",
    "emit_svg_plot",
    "OUTPUT_ROOT_ENV",
]

OUTPUT_ROOT_ENV = "SIM_OUT_ROOT"

CERTIFICATE_NAMES = (
    "conservation",
    "mass_monotone",
    "w_max_principle",
    "v_positive",
    "v_certificate",
    "boundedness_plateau",
    "equilibrium_convergence",
)

# Pinned certificate tolerances.
CONSERVATION_RTOL = 1e-10
W_MAX_ATOL = 1e-12
CERT_SLACK_RTOL = 1e-6          # slack >= -rtol * max v
PLATEAU_GROWTH = 1.05           # final-quarter max below 1.05x third-quarter max
EQUILIBRIUM_U_TOL = 1e-2
EQUILIBRIUM_W_TOL = 1e-3
MMS_SPATIAL_ORDER = (1.8, 2.2)
MMS_TEMPORAL_ORDER = (0.8, 1.2)


class ConfigError(ValueError):
    """Invalid run configuration; the message carries the offending key."""


# ---------------------------------------------------------------------------
# Config schema and parsing
# ---------------------------------------------------------------------------

_SCHEMA = {
    "grid": {"dim", "n", "L"},
    "physics": {"D", "alpha", "gamma", "intake", "working_range"},
    "initial": {"u0", "v0", "w0", "noise_u", "noise_v", "noise_w"},
    "stepper": {"cfl_safety", "dt_max", "t_end", "overflow_guard", "record_every"},
    "helmholtz": {"backend", "tol"},
    "output": {"directory", "snapshot_every", "fields", "plots"},
}
_TOP_KEYS = set(_SCHEMA) | {"name", "seed"}

_GAMMA_KEYS = {
    "power": {"family", "c0", "k"},
    "exp": {"family", "chi"},
    "exponential": {"family", "chi"},
    "rational": {"family", "c", "k"},
    "tabulated": {"family", "v_points", "gamma_points"},
}
_INTAKE_KEYS = {
    "hill": {"family", "lambda"},
    "linear": {"family", "slope"},
    "tabulated": {"family", "w_points", "f_points"},
}


def _require(cond: bool, key: str, message: str):
    if not cond:
        raise ConfigError(f"{key}: {message}")


def _number(table: dict, section: str, key: str, default=None):
    if key not in table:
        if default is None:
            raise ConfigError(f"{section}.{key}: required key missing")
        return default
    v = table[key]
    _require(isinstance(v, (int, float)) and not isinstance(v, bool),
             f"{section}.{key}", f"expected a number, got {v!r}")
    return float(v)


def _check_keys(table: dict, allowed: set, section: str):
    unknown = set(table) - allowed
    if unknown:
        key = sorted(unknown)[0]
        raise ConfigError(f"{section}.{key}: unknown key (strict parsing); "
                          f"allowed keys: {sorted(allowed)}")


def _parse_motility(table, section="physics.gamma"):
    _require(isinstance(table, dict), section, "expected an inline table")
    fam = table.get("family")
    _require(fam in _GAMMA_KEYS, section,
             f"family must be one of {sorted(set(_GAMMA_KEYS))}, got {fam!r}")
    _check_keys(table, _GAMMA_KEYS[fam], section)
    try:
        if fam == "power":
            return PowerLawMotility(c0=_number(table, section, "c0", 1.0),
                                    k=_number(table, section, "k", 1.0))
        if fam in ("exp", "exponential"):
            return ExponentialMotility(chi=_number(table, section, "chi", 1.0))
        if fam == "rational":
            return RationalMotility(c=_number(table, section, "c", 1.0),
                                    k=_number(table, section, "k", 1.0))
        return TabulatedMotility(tuple(table["v_points"]), tuple(table["gamma_points"]))
    except ValueError as exc:
        raise ConfigError(f"{section}: {exc}") from exc


def _parse_intake(table, section="physics.intake"):
    _require(isinstance(table, dict), section, "expected an inline table")
    fam = table.get("family")
    _require(fam in _INTAKE_KEYS, section,
             f"family must be one of {sorted(_INTAKE_KEYS)}, got {fam!r}")
    _check_keys(table, _INTAKE_KEYS[fam], section)
    try:
        if fam == "hill":
            return HillIntake(lam=_number(table, section, "lambda", 1.0))
        if fam == "linear":
            return LinearIntake(slope=_number(table, section, "slope", 1.0))
        return TabulatedIntake(tuple(table["w_points"]), tuple(table["f_points"]))
    except ValueError as exc:
        raise ConfigError(f"{section}: {exc}") from exc


@dataclass
class RunConfig:
    """Validated run configuration with defaults applied."""

    name: str
    grid: Grid
    D: float
    alpha: float
    motility: object
    intake: object
    working_range: tuple[float, float]
    u0: object
    v0: object
    w0: object
    noise: tuple[float, float, float]
    seed: int
    cfl_safety: float
    dt_max: float
    t_end: float
    overflow_guard: float
    record_every: float
    helmholtz_backend: str
    helmholtz_tol: float
    output_directory: str
    snapshot_every: float | None
    output_fields: tuple[str, ...]
    plots: bool
    echo: dict = dc_field(repr=False, default_factory=dict)

    def solver_config(self) -> SolverConfig:
        return SolverConfig(
            D=self.D, alpha=self.alpha,
            motility=self.motility, intake=self.intake,
            t_end=self.t_end, cfl_safety=self.cfl_safety, dt_max=self.dt_max,
            overflow_guard=self.overflow_guard,
            helmholtz_backend=self.helmholtz_backend,
            helmholtz_tol=self.helmholtz_tol,
            record_every=self.record_every,
        )


_PROFILE_ENV = {
    "pi": np.pi, "e": np.e,
    "sin": np.sin, "cos": np.cos, "tan": np.tan, "exp": np.exp,
    "log": np.log, "sqrt": np.sqrt, "tanh": np.tanh, "cosh": np.cosh,
    "sinh": np.sinh, "abs": np.abs, "minimum": np.minimum,
    "maximum": np.maximum, "where": np.where,
}


def _eval_profile(spec, grid: Grid, key: str) -> np.ndarray:
    """Initial profile from a number, an expression over x (and y), or a
    ``file:`` snapshot reference."""
    if isinstance(spec, (int, float)) and not isinstance(spec, bool):
        return np.full(grid.shape, float(spec))
    _require(isinstance(spec, str), key, f"expected number or string, got {spec!r}")
    if spec.startswith("file:"):
        path = spec[len("file:"):]
        try:
            f, _, _ = read_snapshot(path)
        except OSError as exc:
            raise ConfigError(f"{key}: cannot read snapshot {path!r}: {exc}") from exc
        _require(f.grid == grid, key,
                 f"snapshot grid {f.grid.n} does not match run grid {grid.n}")
        return np.array(f.values)
    env = dict(_PROFILE_ENV)
    coords = grid.meshgrid()
    env["x"] = coords[0]
    env["Lx"] = grid.L[0]
    if grid.dim == 2:
        env["y"] = coords[1]
        env["Ly"] = grid.L[1]
    try:
        values = eval(spec, {"__builtins__": {}}, env)
    except Exception as exc:
        raise ConfigError(f"{key}: cannot evaluate expression {spec!r}: {exc}") from exc
    return np.broadcast_to(np.asarray(values, dtype=np.float64), grid.shape).copy()


def parse_config(text: str, name: str | None = None) -> RunConfig:
    """Parse and validate a TOML run config (strict: unknown keys are errors)."""
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"TOML syntax error: {exc}") from exc

    _check_keys(raw, _TOP_KEYS, "config")
    for sec in ("grid", "physics", "initial", "stepper"):
        _require(sec in raw, f"config.{sec}", "required section missing")
    for sec, allowed in _SCHEMA.items():
        if sec in raw:
            _require(isinstance(raw[sec], dict), f"config.{sec}", "expected a table")
            _check_keys(raw[sec], allowed, sec)

    g = raw["grid"]
    dim = g.get("dim")
    _require(dim in (1, 2), "grid.dim", f"must be 1 or 2, got {dim!r}")
    _require("n" in g, "grid.n", "required key missing")
    _require("L" in g, "grid.L", "required key missing")
    try:
        grid = make_grid(dim, g["n"], g["L"])
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"grid: {exc}") from exc

    p = raw["physics"]
    D = _number(p, "physics", "D")
    _require(D > 0.0, "physics.D", f"must be positive (got {D:g})")
    alpha = _number(p, "physics", "alpha")
    _require(alpha > 0.0, "physics.alpha", f"must be positive (got {alpha:g})")
    _require("gamma" in p, "physics.gamma", "required key missing")
    _require("intake" in p, "physics.intake", "required key missing")
    motility = _parse_motility(p["gamma"])
    intake = _parse_intake(p["intake"])
    wr = p.get("working_range", list(DEFAULT_WORKING_RANGE))
    _require(isinstance(wr, (list, tuple)) and len(wr) == 2, "physics.working_range",
             "expected [v_lo, v_hi]")
    working_range = (float(wr[0]), float(wr[1]))
    _require(0.0 < working_range[0] < working_range[1], "physics.working_range",
             "need 0 < v_lo < v_hi")

    ini = raw["initial"]
    for key in ("u0", "v0", "w0"):
        _require(key in ini, f"initial.{key}", "required key missing")
    noise = tuple(_number(ini, "initial", k, 0.0)
                  for k in ("noise_u", "noise_v", "noise_w"))

    st = raw["stepper"]
    t_end = _number(st, "stepper", "t_end")
    _require(t_end >= 0.0, "stepper.t_end", "must be non-negative")
    cfl = _number(st, "stepper", "cfl_safety", 0.4)
    _require(0.0 < cfl < 1.0, "stepper.cfl_safety", "must lie in (0, 1)")
    dt_max = _number(st, "stepper", "dt_max", math.inf)
    _require(dt_max > 0.0, "stepper.dt_max", "must be positive")
    overflow = _number(st, "stepper", "overflow_guard", 1e12)
    _require(overflow > 0.0, "stepper.overflow_guard", "must be positive")
    default_record = t_end / 200.0 if t_end > 0 else 1.0
    record_every = _number(st, "stepper", "record_every", default_record)
    _require(record_every > 0.0, "stepper.record_every", "must be positive")

    hh = raw.get("helmholtz", {})
    backend = hh.get("backend", "spectral")
    _require(backend in ("spectral", "cg"), "helmholtz.backend",
             f"must be 'spectral' or 'cg', got {backend!r}")
    tol = _number(hh, "helmholtz", "tol", 1e-12)
    _require(tol > 0.0, "helmholtz.tol", "must be positive")

    out = raw.get("output", {})
    directory = out.get("directory", "")
    snapshot_every = out.get("snapshot_every")
    if snapshot_every is not None:
        snapshot_every = _number(out, "output", "snapshot_every")
        _require(snapshot_every > 0.0, "output.snapshot_every", "must be positive")
    fields = tuple(out.get("fields", ("u", "v", "w")))
    for f in fields:
        _require(f in ("u", "v", "w", "g"), "output.fields",
                 f"fields must be among u, v, w, g; got {f!r}")
    plots = out.get("plots", True)
    _require(isinstance(plots, bool), "output.plots", "expected a boolean")

    seed = raw.get("seed", 0)
    _require(isinstance(seed, int) and not isinstance(seed, bool), "seed",
             "expected an integer")

    cfg_name = name or raw.get("name", "run")
    _require(isinstance(cfg_name, str), "name", "expected a string")

    cfg = RunConfig(
        name=cfg_name, grid=grid, D=D, alpha=alpha,
        motility=motility, intake=intake, working_range=working_range,
        u0=ini["u0"], v0=ini["v0"], w0=ini["w0"],
        noise=noise, seed=seed,
        cfl_safety=cfl, dt_max=dt_max, t_end=t_end,
        overflow_guard=overflow, record_every=record_every,
        helmholtz_backend=backend, helmholtz_tol=tol,
        output_directory=directory, snapshot_every=snapshot_every,
        output_fields=fields, plots=plots,
    )
    cfg.echo = _echo_dict(cfg)
    return cfg


def parse_config_file(path) -> RunConfig:
    text = Path(path).read_text()
    return parse_config(text, name=Path(path).stem)


def _echo_dict(cfg: RunConfig) -> dict:
    """Resolved configuration (defaults applied) for the report."""
    return {
        "name": cfg.name,
        "grid": {"dim": cfg.grid.dim, "n": list(cfg.grid.n), "L": list(cfg.grid.L)},
        "physics": {
            "D": cfg.D, "alpha": cfg.alpha,
            "gamma": repr(cfg.motility), "intake": repr(cfg.intake),
            "working_range": list(cfg.working_range),
        },
        "initial": {"u0": cfg.u0, "v0": cfg.v0, "w0": cfg.w0,
                    "noise": list(cfg.noise)},
        "stepper": {"cfl_safety": cfg.cfl_safety, "dt_max": cfg.dt_max,
                    "t_end": cfg.t_end, "overflow_guard": cfg.overflow_guard,
                    "record_every": cfg.record_every},
        "helmholtz": {"backend": cfg.helmholtz_backend, "tol": cfg.helmholtz_tol},
        "output": {"directory": cfg.output_directory,
                   "snapshot_every": cfg.snapshot_every,
                   "fields": list(cfg.output_fields), "plots": cfg.plots},
        "seed": cfg.seed,
    }


def build_initial_state(cfg: RunConfig) -> State:
    u = _eval_profile(cfg.u0, cfg.grid, "initial.u0")
    v = _eval_profile(cfg.v0, cfg.grid, "initial.v0")
    w = _eval_profile(cfg.w0, cfg.grid, "initial.w0")
    if any(a > 0.0 for a in cfg.noise):
        rng = np.random.default_rng(cfg.seed)
        amp_u, amp_v, amp_w = cfg.noise
        if amp_u > 0.0:
            u = np.maximum(u + amp_u * (2.0 * rng.random(cfg.grid.shape) - 1.0), 0.0)
        if amp_v > 0.0:
            v = v + amp_v * (2.0 * rng.random(cfg.grid.shape) - 1.0)
        if amp_w > 0.0:
            w = np.maximum(w + amp_w * (2.0 * rng.random(cfg.grid.shape) - 1.0), 0.0)
    try:
        return init_state(cfg.grid, u, v, w)
    except ValueError as exc:
        raise ConfigError(f"initial: {exc}") from exc


# ---------------------------------------------------------------------------
# Built-in scenario catalogue
# ---------------------------------------------------------------------------

_CATALOG_TOML = {
    "boundedness-power": """\
# Uniform-boundedness benchmark.  Power-law motility keeps v^k gamma(v)
# bounded below, the regime with a uniform-in-time bound; all certificates
# are required to hold.  Domain 8x8 at 64^2 and t_end 200 are sized so the
# run finishes in a few minutes while reaching the late-time plateau.
name = "boundedness-power"
seed = 0

[grid]
dim = 2
n = [64, 64]
L = [8.0, 8.0]

[physics]
D = 1.0
alpha = 1.0
gamma = { family = "power", c0 = 1.0, k = 1.0 }
intake = { family = "hill", lambda = 1.0 }

[initial]
u0 = "1 + 0.1*cos(pi*x/Lx)*cos(pi*y/Ly)"
v0 = "1.0"
w0 = "1.0"

[stepper]
t_end = 200.0
record_every = 0.5

[output]
plots = true
""",
    "boundedness-exp": """\
# Exponential motility decays faster than any power, so the uniform-bound
# condition fails and no plateau is certified; the run is monitored for
# growth of v and decay of gamma(v) instead.  Same domain and data as the
# power-law benchmark for comparability.
name = "boundedness-exp"
seed = 0

[grid]
dim = 2
n = [64, 64]
L = [8.0, 8.0]

[physics]
D = 1.0
alpha = 1.0
gamma = { family = "exp", chi = 1.0 }
intake = { family = "hill", lambda = 1.0 }

[initial]
u0 = "1 + 0.1*cos(pi*x/Lx)*cos(pi*y/Ly)"
v0 = "1.0"
w0 = "1.0"

[stepper]
t_end = 200.0
record_every = 0.5

[output]
plots = true
""",
    "equilibrium-largeD": """\
# Large signal diffusivity: the solution relaxes to the homogeneous state
# (u*, u*, 0) with u* set by the conserved total mass.  The small Hill
# half-saturation speeds up the (algebraic) nutrient depletion so the
# equilibrium tolerances are reached by t_end = 500.
name = "equilibrium-largeD"
seed = 0

[grid]
dim = 1
n = 64
L = 6.0

[physics]
D = 10.0
alpha = 1.0
gamma = { family = "power", c0 = 1.0, k = 1.0 }
intake = { family = "hill", lambda = 0.25 }

[initial]
u0 = "1 + 0.1*cos(pi*x/Lx)"
v0 = "1.0"
w0 = "0.5"

[stepper]
t_end = 500.0
record_every = 1.0

[output]
plots = true
""",
    "dsm-original": """\
# The original three-component model: saturating (Hill) nutrient intake,
# rational motility decaying like 1/v^2.  At these parameters the uniform
# state is cross-diffusion unstable, so an initial inoculum grows into
# spatial patterns; exploration run with plot and snapshot output.
name = "dsm-original"
seed = 0

[grid]
dim = 2
n = [64, 64]
L = [8.0, 8.0]

[physics]
D = 1.0
alpha = 2.0
gamma = { family = "rational", c = 1.0, k = 2.0 }
intake = { family = "hill", lambda = 1.0 }

[initial]
u0 = "0.1 + 2*exp(-((x-4)**2 + (y-4)**2)/0.5)"
v0 = "0.5"
w0 = "1.0"

[stepper]
t_end = 40.0
record_every = 0.25

[output]
plots = true
snapshot_every = 10.0
""",
}

# Certificates whose failure flips the exit code, per scenario.
_REQUIRED_CERTS = {
    "boundedness-power": ("conservation", "mass_monotone", "w_max_principle",
                          "v_positive", "v_certificate", "boundedness_plateau"),
    "boundedness-exp": ("conservation", "mass_monotone", "w_max_principle",
                        "v_positive", "v_certificate"),
    "equilibrium-largeD": ("conservation", "mass_monotone", "w_max_principle",
                           "v_positive", "v_certificate", "equilibrium_convergence"),
    "dsm-original": ("conservation", "mass_monotone", "w_max_principle",
                     "v_positive", "v_certificate"),
}

MMS_SCENARIO = "mms-convergence"


def scenario_names() -> list[str]:
    return sorted(_CATALOG_TOML) + [MMS_SCENARIO]


def scenario_config_text(name: str) -> str:
    if name not in _CATALOG_TOML:
        raise KeyError(f"unknown scenario {name!r}; known: {scenario_names()}")
    return _CATALOG_TOML[name]


# ---------------------------------------------------------------------------
# Output emission
# ---------------------------------------------------------------------------

def emit_timeseries_csv(path, records) -> str:
    write_records_csv(path, records)
    return str(path)


def emit_snapshot(path, f, t, name) -> str:
    write_snapshot(path, f, t, name)
    return str(path)


def emit_svg_plot(path, title, records, columns, logy=False) -> str:
    t = [r.t for r in records]
    series = {col: [getattr(r, col) for r in records] for col in columns}
    write_timeseries_svg(path, title, t, series, logy=logy)
    return str(path)


# ---------------------------------------------------------------------------
# Certificate evaluation and reporting
# ---------------------------------------------------------------------------

@dataclass
class ScenarioReport:
    """Outcome summary of one scenario run (serialized as report.json)."""

    name: str
    passed: bool
    certificates: dict
    headline: dict
    artifacts: list
    abort: str | None
    steps: int
    runtime_seconds: float
    config: dict

    def to_json(self) -> str:
        return json.dumps(dataclasses.asdict(self), indent=2, default=_json_default)


def _json_default(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    return str(obj)


def _evaluate_certificates(records, stats, cfg: RunConfig, required,
                           final_state) -> tuple[dict, dict]:
    certs = {name: "not-applicable" for name in CERTIFICATE_NAMES}
    headline: dict = {}
    if not records:
        return certs, headline

    alpha = cfg.alpha
    total0 = records[0].total
    drift = max(abs(r.total - alpha * r.clamp_mass - total0) for r in records)
    rel_drift = drift / abs(total0) if total0 else drift
    certs["conservation"] = "pass" if rel_drift <= CONSERVATION_RTOL else "fail"
    headline["conservation_rel_drift"] = rel_drift

    min_delta = stats.min_mass_u_delta if stats is not None else math.nan
    certs["mass_monotone"] = "pass" if min_delta >= 0.0 else "fail"
    headline["min_mass_u_delta"] = min_delta

    w_max0 = records[0].max_w
    worst_w = max(r.max_w - w_max0 for r in records)
    certs["w_max_principle"] = "pass" if worst_w <= W_MAX_ATOL else "fail"
    headline["w_max_excess"] = worst_w

    min_v = min(r.min_v for r in records)
    certs["v_positive"] = "pass" if min_v > 0.0 else "fail"
    headline["min_v_over_run"] = min_v

    worst_slack = min(r.cert_slack + CERT_SLACK_RTOL * r.max_v for r in records)
    certs["v_certificate"] = "pass" if worst_slack >= 0.0 else "fail"
    headline["min_cert_slack"] = min(r.cert_slack for r in records)

    headline["final_u_linf"] = records[-1].u_linf
    headline["clamp_mass"] = records[-1].clamp_mass

    if "boundedness_plateau" in required:
        t_end = records[-1].t
        q3 = [r.u_linf for r in records if 0.5 * t_end <= r.t < 0.75 * t_end]
        q4 = [r.u_linf for r in records if r.t >= 0.75 * t_end]
        if q3 and q4:
            growth = max(q4) / max(q3)
            certs["boundedness_plateau"] = ("pass" if growth < PLATEAU_GROWTH
                                            else "fail")
            headline["plateau_growth"] = growth
        else:
            certs["boundedness_plateau"] = "fail"

    if "equilibrium_convergence" in required and final_state is not None:
        u_star = equilibrium_value(records[0].mass_u, records[0].mass_w,
                                   alpha, cfg.grid.volume)
        du = float(np.abs(final_state.u.values - u_star).max())
        dw = float(np.abs(final_state.w.values).max())
        ok = du <= EQUILIBRIUM_U_TOL and dw <= EQUILIBRIUM_W_TOL
        certs["equilibrium_convergence"] = "pass" if ok else "fail"
        headline["u_star"] = u_star
        headline["equilibrium_du"] = du
        headline["equilibrium_dw"] = dw

    return certs, headline


def _resolve_out_dir(name: str, out_dir) -> Path:
    if out_dir is not None:
        path = Path(out_dir)
    else:
        root = os.environ.get(OUTPUT_ROOT_ENV, "out")
        path = Path(root) / name
    path.mkdir(parents=True, exist_ok=True)
    return path


def run_scenario(spec, out_dir=None, t_end: float | None = None,
                 grid_n: int | None = None) -> ScenarioReport:
    """Execute a scenario by name, config path, or RunConfig.

    Writes diagnostics CSV, snapshots, plots, and report.json into the
    output directory (``--out``, else $SIM_OUT_ROOT/<name>, else
    out/<name>); the report is written even when the run aborts.
    """
    if isinstance(spec, RunConfig):
        cfg = spec
    elif isinstance(spec, str) and spec == MMS_SCENARIO:
        return _run_mms_scenario(out_dir)
    elif isinstance(spec, str) and spec in _CATALOG_TOML:
        cfg = parse_config(_CATALOG_TOML[spec], name=spec)
    elif isinstance(spec, (str, Path)) and Path(spec).exists():
        cfg = parse_config_file(spec)
    else:
        raise ConfigError(
            f"{spec!r} is neither a known scenario ({scenario_names()}) "
            "nor a readable config file"
        )

    if t_end is not None:
        cfg = dataclasses.replace(cfg, t_end=float(t_end))
        cfg.echo = _echo_dict(cfg)
    if grid_n is not None:
        cfg = dataclasses.replace(cfg, grid=make_grid(cfg.grid.dim, int(grid_n),
                                                      cfg.grid.L))
        cfg.echo = _echo_dict(cfg)

    out = _resolve_out_dir(cfg.name, out_dir)
    required = _REQUIRED_CERTS.get(cfg.name,
                                   ("conservation", "mass_monotone",
                                    "w_max_principle", "v_positive",
                                    "v_certificate"))

    artifacts: list[str] = []
    abort_reason = None
    stats = None
    final_state = None

    s0 = build_initial_state(cfg)
    solver_cfg = cfg.solver_config()
    collector = DiagnosticsCollector(solver_cfg)

    snap_times: list[float] = []

    def field_snapshots(state: State, tag: str):
        fields = {"u": state.u, "v": state.v, "w": state.w}
        for fname in cfg.output_fields:
            if fname == "g":
                from .diagnostics import compute_g
                f = compute_g(state, cfg.D, cfg.helmholtz_backend, cfg.helmholtz_tol)
            else:
                f = fields[fname]
            path = out / f"snapshot_{fname}_{tag}.csv"
            emit_snapshot(path, f, state.t, fname)
            artifacts.append(str(path))

    def sink(prev, curr, dt, clamp_total):
        collector(prev, curr, dt, clamp_total)
        if cfg.snapshot_every is not None:
            k = len(snap_times)
            if curr.t >= k * cfg.snapshot_every - 1e-9:
                snap_times.append(curr.t)
                field_snapshots(curr, f"t{curr.t:g}")

    try:
        result = run(s0, solver_cfg, sink=sink)
        final_state = result.state
        stats = result.stats
    except SimulationAbort as exc:
        abort_reason = f"{type(exc).__name__}: {exc}"
        stats = None
        if exc.state is not None:
            final_state = exc.state
            field_snapshots(exc.state, "abort")

    records = collector.records
    csv_path = out / "diagnostics.csv"
    emit_timeseries_csv(csv_path, records)
    artifacts.append(str(csv_path))

    if final_state is not None and abort_reason is None:
        field_snapshots(s0, "initial")
        field_snapshots(final_state, "final")

    if cfg.plots and records:
        p = out / "timeseries_masses.svg"
        emit_svg_plot(p, f"{cfg.name}: masses", records,
                      ["mass_u", "mass_w", "total"])
        artifacts.append(str(p))
        p = out / "timeseries_extrema.svg"
        emit_svg_plot(p, f"{cfg.name}: extrema", records,
                      ["max_u", "min_v", "max_v", "max_w"])
        artifacts.append(str(p))
        p = out / "timeseries_certificate.svg"
        emit_svg_plot(p, f"{cfg.name}: certificate slack", records,
                      ["cert_slack"])
        artifacts.append(str(p))

    certs, headline = _evaluate_certificates(records, stats, cfg, required,
                                             final_state)
    passed = abort_reason is None and all(
        certs[name] == "pass" for name in required
    )
    report = ScenarioReport(
        name=cfg.name,
        passed=passed,
        certificates=certs,
        headline=headline,
        artifacts=artifacts,
        abort=abort_reason,
        steps=stats.steps if stats is not None else len(records),
        runtime_seconds=stats.wall_seconds if stats is not None else math.nan,
        config=cfg.echo,
    )
    report_path = out / "report.json"
    report_path.write_text(report.to_json() + "\n")
    report.artifacts.append(str(report_path))
    return report


def _run_mms_scenario(out_dir=None) -> ScenarioReport:
    """Manufactured-solution order verification: h and dt refinement tables."""
    out = _resolve_out_dir(MMS_SCENARIO, out_dir)
    import time
    t0 = time.perf_counter()
    spatial = mms_mod.spatial_study()
    temporal = mms_mod.temporal_study()
    runtime = time.perf_counter() - t0

    lines = ["study,level,error,order"]
    for i, (n, err) in enumerate(zip(spatial.levels, spatial.errors)):
        order = spatial.orders[i - 1] if i > 0 else math.nan
        lines.append(f"spatial,{n},{err:.17g},{order:.17g}")
    for i, (dt, err) in enumerate(zip(temporal.levels, temporal.errors)):
        order = temporal.orders[i - 1] if i > 0 else math.nan
        lines.append(f"temporal,{dt:.17g},{err:.17g},{order:.17g}")
    table_path = out / "refinement_tables.csv"
    table_path.write_text("\n".join(lines) + "\n")

    sp_ok = all(MMS_SPATIAL_ORDER[0] <= o <= MMS_SPATIAL_ORDER[1]
                for o in spatial.orders)
    tm_ok = all(MMS_TEMPORAL_ORDER[0] <= o <= MMS_TEMPORAL_ORDER[1]
                for o in temporal.orders)

    certs = {name: "not-applicable" for name in CERTIFICATE_NAMES}
    headline = {
        "spatial_orders": list(spatial.orders),
        "temporal_orders": list(temporal.orders),
        "spatial_errors": list(spatial.errors),
        "temporal_diffs": list(temporal.errors),
    }
    report = ScenarioReport(
        name=MMS_SCENARIO,
        passed=sp_ok and tm_ok,
        certificates=certs,
        headline=headline,
        artifacts=[str(table_path)],
        abort=None,
        steps=0,
        runtime_seconds=runtime,
        config={"name": MMS_SCENARIO},
    )
    report_path = out / "report.json"
    report_path.write_text(report.to_json() + "\n")
    report.artifacts.append(str(report_path))
    return report


def assumption_report(cfg: RunConfig):
    """Sampled validation of the structural assumptions for a config."""
    return validate_assumptions(cfg.motility, cfg.intake, cfg.working_range)

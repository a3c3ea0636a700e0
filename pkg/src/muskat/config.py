"""Run configuration: strict flat key=value files with dotted sections.

Unknown keys are errors (no silent typos), every accepted key has a default
or is required, and the fully resolved mapping is echoed into the run
manifest so outputs are reproducible from the manifest alone.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .dynamics import PhysicalParams, StepperConfig
from .grid import GridSpec


class ConfigError(ValueError):
    """Invalid configuration; message carries the key path and reason."""


_KNOWN_KEYS = {
    "grid.dim", "grid.extent", "grid.points",
    "params.lambda", "params.a_mu",
    "params.porosity", "params.gravity", "params.mu_plus", "params.mu_minus",
    "params.rho_plus", "params.rho_minus",
    "initial.kind", "initial.amplitude", "initial.k", "initial.center",
    "initial.width", "initial.path",
    "stepper.scheme", "stepper.dt", "stepper.cfl", "stepper.t_end",
    "stepper.snapshot_stride", "stepper.rt_floor",
    "solver.tol", "solver.max_iter",
    "monitor.sobolev_s",
    "output.dir",
    "validate.suites",
    "seed",
}

_RAW_PARAM_KEYS = ("params.porosity", "params.gravity", "params.mu_plus",
                   "params.mu_minus", "params.rho_plus", "params.rho_minus")


@dataclass
class SimConfig:
    grid: GridSpec
    params: PhysicalParams
    initial_kind: str
    initial: dict
    stepper: StepperConfig
    solver_tol: float
    solver_max_iter: int
    sobolev_s: float
    output_dir: str
    suites: list
    seed: int
    echo: dict = field(default_factory=dict)


def _parse_scalar(key, raw, cast, reason=""):
    try:
        return cast(raw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{key}: cannot parse {raw!r}{reason}") from exc


def _parse_floats(key, raw):
    return [_parse_scalar(key, part.strip(), float)
            for part in str(raw).split(",") if part.strip() != ""]


def parse_kv_text(text: str) -> dict:
    out = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"line {lineno}: expected key = value, got {line!r}")
        key, value = body.split("=", 1)
        key = key.strip()
        if key not in _KNOWN_KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in out:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        out[key] = value.strip()
    return out


def build_config(kv: dict) -> SimConfig:
    def take(key, default=None):
        return kv.get(key, default)

    dim = _parse_scalar("grid.dim", take("grid.dim", "1"), int)
    extent = _parse_scalar("grid.extent", take("grid.extent", repr(2 * 3.141592653589793)), float)
    points = _parse_scalar("grid.points", take("grid.points", "64"), int)
    try:
        grid = GridSpec(dim, extent, points)
    except ValueError as exc:
        raise ConfigError(f"grid: {exc}") from exc

    has_raw = any(k in kv for k in _RAW_PARAM_KEYS)
    has_reduced = "params.lambda" in kv or "params.a_mu" in kv
    if has_raw and has_reduced:
        raise ConfigError("params: give either reduced (lambda, a_mu) or raw "
                          "constants, not both")
    try:
        if has_raw:
            missing = [k for k in _RAW_PARAM_KEYS if k not in kv]
            if missing:
                raise ConfigError(f"params: raw form needs all of {_RAW_PARAM_KEYS}, "
                                  f"missing {missing}")
            params = PhysicalParams.from_raw(
                porosity=_parse_scalar("params.porosity", kv["params.porosity"], float),
                gravity=_parse_scalar("params.gravity", kv["params.gravity"], float),
                mu_plus=_parse_scalar("params.mu_plus", kv["params.mu_plus"], float),
                mu_minus=_parse_scalar("params.mu_minus", kv["params.mu_minus"], float),
                rho_plus=_parse_scalar("params.rho_plus", kv["params.rho_plus"], float),
                rho_minus=_parse_scalar("params.rho_minus", kv["params.rho_minus"], float))
        else:
            params = PhysicalParams(
                lam=_parse_scalar("params.lambda", take("params.lambda", "1.0"), float),
                a_mu=_parse_scalar("params.a_mu", take("params.a_mu", "0.0"), float))
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"params: {exc}") from exc

    kind = take("initial.kind", "zero")
    if kind not in ("zero", "mode", "gaussian", "snapshot"):
        raise ConfigError(f"initial.kind: unknown kind {kind!r}")
    initial = {}
    if kind == "mode":
        initial["amplitude"] = _parse_scalar("initial.amplitude",
                                             take("initial.amplitude", "1.0"), float)
        kvec = [_parse_scalar("initial.k", p.strip(), int)
                for p in str(take("initial.k", "1")).split(",")]
        if len(kvec) != dim:
            raise ConfigError(f"initial.k: need {dim} components, got {len(kvec)}")
        initial["k"] = tuple(kvec)
    elif kind == "gaussian":
        initial["amplitude"] = _parse_scalar("initial.amplitude",
                                             take("initial.amplitude", "1.0"), float)
        center = _parse_floats("initial.center",
                               take("initial.center", ",".join([repr(extent / 2)] * dim)))
        if len(center) != dim:
            raise ConfigError(f"initial.center: need {dim} components, got {len(center)}")
        initial["center"] = center
        initial["width"] = _parse_scalar("initial.width", take("initial.width", "0.5"), float)
    elif kind == "snapshot":
        if "initial.path" not in kv:
            raise ConfigError("initial.path: required for initial.kind = snapshot")
        initial["path"] = kv["initial.path"]

    dt_raw = take("stepper.dt", "auto")
    dt = None if str(dt_raw).strip() == "auto" else _parse_scalar("stepper.dt", dt_raw, float)
    try:
        stepper = StepperConfig(
            scheme=take("stepper.scheme", "rk2"),
            dt=dt,
            cfl=_parse_scalar("stepper.cfl", take("stepper.cfl", "0.5"), float),
            t_end=_parse_scalar("stepper.t_end", take("stepper.t_end", "1.0"), float),
            snapshot_stride=_parse_scalar("stepper.snapshot_stride",
                                          take("stepper.snapshot_stride", "0"), int),
            rt_floor=_parse_scalar("stepper.rt_floor", take("stepper.rt_floor", "0.05"), float))
    except ValueError as exc:
        raise ConfigError(f"stepper: {exc}") from exc

    suites_raw = take("validate.suites", "all")
    suites = [s.strip() for s in suites_raw.split(",") if s.strip()]

    cfg = SimConfig(
        grid=grid,
        params=params,
        initial_kind=kind,
        initial=initial,
        stepper=stepper,
        solver_tol=_parse_scalar("solver.tol", take("solver.tol", "1e-10"), float),
        solver_max_iter=_parse_scalar("solver.max_iter", take("solver.max_iter", "200"), int),
        sobolev_s=_parse_scalar("monitor.sobolev_s", take("monitor.sobolev_s", "2.0"), float),
        output_dir=take("output.dir", "out"),
        suites=suites,
        seed=_parse_scalar("seed", take("seed", "0"), int),
    )
    cfg.echo = {
        "grid.dim": grid.dim, "grid.extent": grid.extent, "grid.points": grid.points,
        "params.lambda": params.lam, "params.a_mu": params.a_mu,
        "initial.kind": kind, **{f"initial.{k}": list(v) if isinstance(v, tuple) else v
                                 for k, v in initial.items()},
        "stepper.scheme": stepper.scheme, "stepper.dt": stepper.dt,
        "stepper.cfl": stepper.cfl, "stepper.t_end": stepper.t_end,
        "stepper.snapshot_stride": stepper.snapshot_stride,
        "stepper.rt_floor": stepper.rt_floor,
        "solver.tol": cfg.solver_tol, "solver.max_iter": cfg.solver_max_iter,
        "monitor.sobolev_s": cfg.sobolev_s, "output.dir": cfg.output_dir,
        "validate.suites": suites, "seed": cfg.seed,
    }
    return cfg


def parse_config(path) -> SimConfig:
    """Read and validate a configuration file; raises ConfigError on any issue."""
    try:
        with open(path, "r") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return build_config(parse_kv_text(text))

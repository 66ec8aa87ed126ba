"""Run configuration: INI text with one block per concern.

Every key has a default, so an empty file is a valid configuration::

    [grid]        dim, half_width, points_per_dim, derivative, interpolation
    [params]      a, b, c, p, q
    [potential]   family, sign, h0, width, decay_s, bumps, h0_rule, h0_fraction
    [solver]      mode, rtol, accept, starts, seed, workers, nodes, max_sweeps,
                  R, s1, s2, radii, angles, s_values, epsilon, max_iter
    [output]      directory, formats, plots, scan_points
    [verify]      groups, samples, seed
    [verify.<group>]  overrides of grid/params/potential/solver keys for one group

``h0_rule`` picks how h0 is read: ``absolute`` uses it as is,
``mountain_pass_fraction`` scales h so ||h||_{p/(p-q)} equals ``h0_fraction``
times its mountain-pass threshold, and ``linking_fraction`` scales h so
||h||_{2/(2-q)} c^{q/2} / q equals ``h0_fraction`` times m_c.
"""

from __future__ import annotations

import configparser
import math
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

from .errors import ConfigError
from .functionals import KirchhoffParams
from .grid import DEFAULT_SIZES, Grid, make_grid
from .potentials import FAMILIES, SIGNS, Bump, PotentialSpec

MODES = ("min", "mp", "link", "limit", "gn", "verify")
H0_RULES = ("absolute", "mountain_pass_fraction", "linking_fraction")
GROUPS = ("identities", "subcritical", "supercritical-positive", "supercritical-negative")
FORMATS = ("csv", "json")

SECTIONS = {
    "grid": {"dim": 1, "half_width": None, "points_per_dim": None, "derivative": "spectral",
             "interpolation": "spectral"},
    "params": {"a": 1.0, "b": 1.0, "c": 1.0, "p": 3.0, "q": 1.5},
    "potential": {"family": "zero", "sign": "nonneg", "h0": 0.0, "width": 1.0, "decay_s": 1.0, "bumps": "",
                  "h0_rule": "absolute", "h0_fraction": 0.0},
    "solver": {"mode": "limit", "rtol": 1e-10, "accept": 1e-6, "starts": 8, "seed": 0, "workers": 1,
               "nodes": 33, "max_sweeps": 2000, "R": 3.0, "s1": -0.5, "s2": 0.5, "radii": 17, "angles": 16,
               "s_values": 25, "epsilon": None, "max_iter": 3000},
    "output": {"directory": "run", "formats": "csv,json", "plots": True, "scan_points": 400},
    "verify": {"groups": ",".join(GROUPS), "samples": 10, "seed": 0},
}

# group defaults mirror the desk-scale regimes exercised by the acceptance suite
GROUP_DEFAULTS = {
    "identities": {"dim": 1, "half_width": 20.0, "points_per_dim": 1024, "p": 4.0, "q": 1.5,
                   "family": "gaussian", "h0": 0.5},
    "subcritical": {"dim": 1, "half_width": 30.0, "points_per_dim": 1536, "p": 3.0, "q": 1.5,
                    "family": "gaussian", "sign": "nonneg", "h0": 0.1},
    "supercritical-positive": {"dim": 1, "half_width": 2.5, "points_per_dim": 1024, "p": 12.0, "q": 1.5,
                               "family": "gaussian", "sign": "nonneg", "h0_rule": "mountain_pass_fraction",
                               "h0_fraction": 0.1},
    "supercritical-negative": {"dim": 1, "half_width": 6.0, "points_per_dim": 2048, "p": 12.0, "q": 1.5,
                               "family": "rational_decay", "sign": "nonpos", "decay_s": 1.0,
                               "h0_rule": "linking_fraction", "h0_fraction": 0.5},
}


@dataclass(frozen=True)
class PotentialConfig:
    spec: PotentialSpec
    h0_rule: str = "absolute"
    h0_fraction: float = 0.0


@dataclass(frozen=True)
class SolverConfig:
    mode: str = "limit"
    rtol: float = 1e-10
    accept: float = 1e-6
    starts: int = 8
    seed: int = 0
    workers: int = 1
    nodes: int = 33
    max_sweeps: int = 2000
    R: float = 3.0
    s1: float = -0.5
    s2: float = 0.5
    radii: int = 17
    angles: int = 16
    s_values: int = 25
    epsilon: float | None = None
    max_iter: int = 3000

    @property
    def grid_Q(self) -> tuple[int, int, int]:
        return (self.radii, self.angles, self.s_values)


@dataclass(frozen=True)
class OutputConfig:
    directory: str = "run"
    formats: tuple[str, ...] = FORMATS
    plots: bool = True
    scan_points: int = 400


@dataclass(frozen=True)
class VerifyConfig:
    groups: tuple[str, ...] = GROUPS
    samples: int = 10
    seed: int = 0
    overrides: dict = field(default_factory=dict)


@dataclass(frozen=True)
class RunConfig:
    grid: Grid
    params: KirchhoffParams
    potential: PotentialConfig
    solver: SolverConfig
    output: OutputConfig
    verify: VerifyConfig
    raw: dict = field(default_factory=dict, compare=False)

    @property
    def spec(self) -> PotentialSpec:
        return self.potential.spec

    def with_mode(self, mode: str) -> "RunConfig":
        cfg = replace(self, solver=replace(self.solver, mode=mode))
        check_mode(cfg)
        return cfg

    def to_dict(self) -> dict:
        return {
            "grid": asdict(self.grid),
            "params": self.params.to_dict(),
            "potential": {**self.spec.to_dict(), "h0_rule": self.potential.h0_rule,
                          "h0_fraction": self.potential.h0_fraction},
            "solver": asdict(self.solver),
            "output": {**asdict(self.output), "formats": list(self.output.formats)},
            "verify": {"groups": list(self.verify.groups), "samples": self.verify.samples,
                       "seed": self.verify.seed, "overrides": self.verify.overrides},
        }


# ---------------------------------------------------------------------------
# value parsing

def _number(text: str, where: str, kind=float):
    try:
        val = kind(text)
    except (TypeError, ValueError):
        raise ConfigError(f"expected {'an integer' if kind is int else 'a number'}, got {text!r}", where) from None
    if kind is float and not math.isfinite(val):
        raise ConfigError(f"must be finite, got {text!r}", where)
    return val


def _bool(text: str, where: str) -> bool:
    low = str(text).strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"expected a boolean, got {text!r}", where)


def _choice(text: str, options, where: str) -> str:
    val = str(text).strip()
    if val not in options:
        raise ConfigError(f"must be one of {', '.join(options)}; got {val!r}", where)
    return val


def _list(text: str, options, where: str) -> tuple[str, ...]:
    items = tuple(s.strip() for s in str(text).split(",") if s.strip())
    for item in items:
        _choice(item, options, where)
    return items


def parse_bumps(text: str, dim: int, where: str = "potential.bumps") -> tuple[Bump, ...]:
    """``x[,y[,z]]:radius:height`` entries separated by ``;``."""
    out = []
    for entry in (e.strip() for e in str(text).split(";")):
        if not entry:
            continue
        parts = entry.split(":")
        if len(parts) != 3:
            raise ConfigError(f"bump {entry!r} must read center:radius:height", where)
        center = tuple(_number(c, where) for c in parts[0].split(","))
        if len(center) != dim:
            raise ConfigError(f"bump center {parts[0]!r} needs {dim} coordinates", where)
        out.append(Bump(center, _number(parts[1], where), _number(parts[2], where)))
    return tuple(out)


# ---------------------------------------------------------------------------
# building blocks from a flat {section: {key: text}} mapping

def _get(raw: dict, section: str, key: str):
    val = raw.get(section, {}).get(key)
    return SECTIONS[section][key] if val is None or val == "" and key != "bumps" else val


def _build_grid(raw: dict) -> Grid:
    dim = _number(_get(raw, "grid", "dim"), "grid.dim", int)
    if dim not in (1, 2, 3):
        raise ConfigError(f"must be 1, 2 or 3, got {dim}", "grid.dim")
    half, points = DEFAULT_SIZES[dim]
    hw = _get(raw, "grid", "half_width")
    pts = _get(raw, "grid", "points_per_dim")
    hw = half if hw is None else _number(hw, "grid.half_width")
    pts = points if pts is None else _number(pts, "grid.points_per_dim", int)
    if not hw > 0:
        raise ConfigError(f"must be positive, got {hw}", "grid.half_width")
    if pts < 16 or pts % 2:
        raise ConfigError(f"must be even and at least 16, got {pts}", "grid.points_per_dim")
    deriv = _choice(_get(raw, "grid", "derivative"), ("spectral", "fd2"), "grid.derivative")
    interp = _choice(_get(raw, "grid", "interpolation"), ("spectral", "linear"), "grid.interpolation")
    try:
        return make_grid(dim, hw, pts, derivative=deriv, interpolation=interp)
    except ValueError as exc:
        raise ConfigError(str(exc), "grid.points_per_dim") from None


def _build_params(raw: dict, dim: int) -> KirchhoffParams:
    vals = {k: _number(_get(raw, "params", k), f"params.{k}") for k in ("a", "b", "c", "p", "q")}
    for k in ("a", "b", "c"):
        if not vals[k] > 0:
            raise ConfigError(f"must be positive, got {vals[k]}", f"params.{k}")
    if not 1.0 <= vals["q"] < 2.0:
        raise ConfigError(f"violates the constraint 1 <= q < 2 (got {vals['q']})", "params.q")
    try:
        return KirchhoffParams(dim, **vals)
    except ValueError as exc:
        raise ConfigError(str(exc), "params.p") from None


def _build_potential(raw: dict, dim: int) -> PotentialConfig:
    family = _choice(_get(raw, "potential", "family"), FAMILIES, "potential.family")
    sign = _choice(_get(raw, "potential", "sign"), SIGNS, "potential.sign")
    vals = {k: _number(_get(raw, "potential", k), f"potential.{k}") for k in ("h0", "width", "decay_s")}
    if vals["h0"] < 0:
        raise ConfigError(f"must be nonnegative (the sign lives in potential.sign), got {vals['h0']}",
                          "potential.h0")
    bumps = parse_bumps(raw.get("potential", {}).get("bumps", ""), dim)
    rule = _choice(_get(raw, "potential", "h0_rule"), H0_RULES, "potential.h0_rule")
    frac = _number(_get(raw, "potential", "h0_fraction"), "potential.h0_fraction")
    if rule != "absolute":
        if not frac > 0:
            raise ConfigError(f"must be positive when h0_rule = {rule}", "potential.h0_fraction")
        vals["h0"] = 1.0
    try:
        spec = PotentialSpec(family, sign, bumps=bumps, **vals)
    except ValueError as exc:
        raise ConfigError(str(exc), "potential.family") from None
    return PotentialConfig(spec, rule, frac)


def _build_solver(raw: dict) -> SolverConfig:
    ints = ("starts", "seed", "workers", "nodes", "max_sweeps", "radii", "angles", "s_values", "max_iter")
    floats = ("rtol", "accept", "R", "s1", "s2")
    kw = {"mode": _choice(_get(raw, "solver", "mode"), MODES, "solver.mode")}
    for k in ints:
        kw[k] = _number(_get(raw, "solver", k), f"solver.{k}", int)
    for k in floats:
        kw[k] = _number(_get(raw, "solver", k), f"solver.{k}")
    eps = _get(raw, "solver", "epsilon")
    kw["epsilon"] = None if eps is None else _number(eps, "solver.epsilon")
    for k in ("starts", "workers", "nodes", "max_sweeps", "max_iter"):
        if kw[k] < 1:
            raise ConfigError(f"must be at least 1, got {kw[k]}", f"solver.{k}")
    if kw["seed"] < 0 or kw["seed"] >= 2**64:
        raise ConfigError("must be an unsigned 64-bit integer", "solver.seed")
    for k in ("rtol", "accept", "R"):
        if not kw[k] > 0:
            raise ConfigError(f"must be positive, got {kw[k]}", f"solver.{k}")
    if not kw["s1"] < 0 < kw["s2"]:
        raise ConfigError(f"need s1 < 0 < s2, got s1={kw['s1']}, s2={kw['s2']}", "solver.s1")
    if kw["radii"] < 2 or kw["s_values"] < 3 or kw["angles"] < 1:
        raise ConfigError("need radii >= 2, s_values >= 3 and angles >= 1", "solver.radii")
    return SolverConfig(**kw)


def _build_output(raw: dict) -> OutputConfig:
    return OutputConfig(
        str(_get(raw, "output", "directory")),
        _list(_get(raw, "output", "formats"), FORMATS, "output.formats"),
        _bool(_get(raw, "output", "plots"), "output.plots"),
        _number(_get(raw, "output", "scan_points"), "output.scan_points", int),
    )


_GROUP_KEYS = {key: sec for sec in ("grid", "params", "potential", "solver") for key in SECTIONS[sec]}


def _build_verify(raw: dict) -> VerifyConfig:
    groups = _list(_get(raw, "verify", "groups"), GROUPS, "verify.groups")
    overrides = {}
    for name, body in raw.items():
        if not name.startswith("verify."):
            continue
        group = name.split(".", 1)[1]
        _choice(group, GROUPS, f"[{name}]")
        for key in body:
            if key not in _GROUP_KEYS:
                raise ConfigError("unknown key", f"{name}.{key}")
        overrides[group] = dict(body)
    return VerifyConfig(groups, _number(_get(raw, "verify", "samples"), "verify.samples", int),
                        _number(_get(raw, "verify", "seed"), "verify.seed", int), overrides)


def check_mode(cfg: RunConfig) -> None:
    """Reject (mode, regime, sign) combinations no solver accepts."""
    mode, regime, spec = cfg.solver.mode, cfg.params.regime, cfg.spec
    need = {"min": "subcritical", "mp": "supercritical", "link": "supercritical"}.get(mode)
    if need and regime != need:
        raise ConfigError(f"mode {mode!r} needs a {need} exponent, p={cfg.params.p} is {regime} "
                          f"in dimension {cfg.params.dim}", "params.p")
    sign = {"min": "nonneg", "mp": "nonneg", "link": "nonpos"}.get(mode)
    if sign and not spec.is_zero and spec.sign != sign:
        raise ConfigError(f"mode {mode!r} needs sign = {sign}", "potential.sign")
    rule = cfg.potential.h0_rule
    if rule == "mountain_pass_fraction" and mode not in ("mp", "gn", "verify"):
        raise ConfigError(f"h0_rule {rule!r} applies to mode mp", "potential.h0_rule")
    if rule == "linking_fraction" and mode not in ("link", "verify"):
        raise ConfigError(f"h0_rule {rule!r} applies to mode link", "potential.h0_rule")


def from_mapping(raw: dict) -> RunConfig:
    """Build a RunConfig from ``{section: {key: text}}``; unknown names are errors."""
    raw = {str(s).strip(): {str(k).strip(): v for k, v in body.items()} for s, body in raw.items()}
    for sec, body in raw.items():
        if sec.startswith("verify."):
            continue
        if sec not in SECTIONS:
            raise ConfigError(f"unknown block [{sec}]", sec)
        for key in body:
            if key not in SECTIONS[sec]:
                raise ConfigError("unknown key", f"{sec}.{key}")
    grid = _build_grid(raw)
    cfg = RunConfig(grid, _build_params(raw, grid.dim), _build_potential(raw, grid.dim), _build_solver(raw),
                    _build_output(raw), _build_verify(raw), raw)
    if "mode" in raw.get("solver", {}):
        check_mode(cfg)
    return cfg


def _parser() -> configparser.ConfigParser:
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    parser.optionxform = str  # keys such as R are case sensitive
    return parser


def parse_text(text: str, overrides: list[str] | tuple = ()) -> RunConfig:
    parser = _parser()
    try:
        parser.read_string(text, source="<config>")
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse: {exc}".replace("\n", " "), "config") from None
    raw = {s: dict(parser.items(s)) for s in parser.sections()}
    for item in overrides:
        key, sep, value = item.partition("=")
        section, dot, name = key.strip().rpartition(".")
        if not sep or not dot:
            raise ConfigError(f"override {item!r} must read block.key=value", "--set")
        raw.setdefault(section, {})[name] = value.strip()
    return from_mapping(raw)


def load(path: str | Path | None, overrides: list[str] | tuple = ()) -> RunConfig:
    if path is None:
        return parse_text("", overrides)
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"no such file {str(path)!r}", "--config")
    return parse_text(path.read_text(), overrides)


def group_config(cfg: RunConfig, group: str) -> RunConfig:
    """The configuration a verification group runs with: its defaults, then user overrides."""
    raw = {sec: {} for sec in ("grid", "params", "potential", "solver")}
    for sec in ("params", "solver"):
        raw[sec].update(cfg.raw.get(sec, {}))
    raw["solver"].pop("mode", None)
    for key, val in {**GROUP_DEFAULTS[group], **cfg.verify.overrides.get(group, {})}.items():
        raw[_GROUP_KEYS[key]][key] = str(val)
    raw["solver"]["mode"] = "verify"
    return from_mapping(raw)


def render(cfg: RunConfig) -> str:
    """INI text that parses back to ``cfg``."""
    d = cfg.to_dict()
    lines = []
    blocks = {
        "grid": d["grid"],
        "params": {k: v for k, v in d["params"].items() if k != "dim"},
        "potential": {k: v for k, v in d["potential"].items() if k != "bumps"},
        "solver": d["solver"],
        "output": d["output"],
        "verify": {k: v for k, v in d["verify"].items() if k != "overrides"},
    }
    bumps = ";".join(",".join(repr(float(x)) for x in b["center"]) + f":{b['radius']!r}:{b['height']!r}"
                     for b in d["potential"]["bumps"])
    if bumps:
        blocks["potential"]["bumps"] = bumps
    if cfg.potential.h0_rule != "absolute":
        blocks["potential"].pop("h0")
    for name, body in list(blocks.items()) + [(f"verify.{g}", o) for g, o in cfg.verify.overrides.items()]:
        lines.append(f"[{name}]")
        for k, v in body.items():
            if v is None:
                continue
            if isinstance(v, (list, tuple)):
                v = ",".join(str(x) for x in v)
            elif isinstance(v, float):
                v = repr(v)
            lines.append(f"{k} = {v}")
        lines.append("")
    return "\n".join(lines)

"""Run configuration: TOML file, then command-line overrides, validated at load.

Every problem is reported as a :class:`ConfigError` naming the offending
field path (``protocol.V_in`` and so on). The README documents the schema;
``configs/default.toml`` lists every key with its default.
"""

import dataclasses
import math
import sys
from dataclasses import dataclass, field

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .errors import InvalidArgumentError
from .fock_oracle import DEFAULT_CAP
from .cloning_protocol import DEFAULT_SWEEP_CAP, SWEEP_AXES


class ConfigError(InvalidArgumentError):
    """Invalid configuration; ``path`` is the dotted field path."""

    def __init__(self, path, message):
        super().__init__(f"{path}: {message}")
        self.path = path


@dataclass(frozen=True)
class Units:
    hbar: float = 1.0
    c: float = 1.0
    g: float = 1.0


@dataclass(frozen=True)
class Cavity:
    E_at: float = 10.0
    # None means "resonant": the k_par = 0 photon matches E_at
    L_cav: float = None
    m: int = 1


@dataclass(frozen=True)
class Dispersion:
    k_par_max: float = 5.0
    n_points: int = 101
    mode: str = "exact"


@dataclass(frozen=True)
class Protocol:
    gamma_re: float = 1.0
    gamma_im: float = 0.0
    V_in: float = 1.0
    gain: float = 2.0
    N: int = 0
    alpha2: float = 1.0
    phi_rel: float = 0.0
    delta: float = 0.0
    convention: str = "formula"
    literal_sign: bool = False

    @property
    def gamma(self):
        return complex(self.gamma_re, self.gamma_im)


@dataclass(frozen=True)
class Oracle:
    cutoff: int = 30
    cap: int = DEFAULT_CAP
    tolerance: float = 1e-6
    seed: int = 0
    workers: int = 1


@dataclass(frozen=True)
class Sweep:
    cap: int = DEFAULT_SWEEP_CAP
    grid: dict = field(default_factory=dict)


@dataclass(frozen=True)
class Readout:
    t_max: float = math.pi
    n_times: int = 101
    # add the quarter Rabi period g t / hbar = pi/2 to the grid if missing
    include_quarter_period: bool = True


@dataclass(frozen=True)
class Output:
    format: str = None
    path: str = "-"
    precision: int = 15
    quiet: bool = False


@dataclass(frozen=True)
class RunConfig:
    units: Units = field(default_factory=Units)
    cavity: Cavity = field(default_factory=Cavity)
    dispersion: Dispersion = field(default_factory=Dispersion)
    protocol: Protocol = field(default_factory=Protocol)
    oracle: Oracle = field(default_factory=Oracle)
    sweep: Sweep = field(default_factory=Sweep)
    readout: Readout = field(default_factory=Readout)
    output: Output = field(default_factory=Output)

    def to_dict(self):
        return dataclasses.asdict(self)


BLOCKS = {f.name: f.type for f in dataclasses.fields(RunConfig)}


def _coerce(path, value, kind):
    if kind is bool:
        if isinstance(value, bool):
            return value
        if isinstance(value, str) and value.lower() in ("true", "false", "1", "0", "yes", "no"):
            return value.lower() in ("true", "1", "yes")
        raise ConfigError(path, f"expected a boolean, got {value!r}")
    if kind is int:
        if isinstance(value, bool):
            raise ConfigError(path, f"expected an integer, got {value!r}")
        try:
            f = float(value)
        except (TypeError, ValueError):
            raise ConfigError(path, f"expected an integer, got {value!r}") from None
        if not f.is_integer():
            raise ConfigError(path, f"expected an integer, got {value!r}")
        return int(f)
    if kind is float:
        if isinstance(value, bool):
            raise ConfigError(path, f"expected a number, got {value!r}")
        try:
            f = float(value)
        except (TypeError, ValueError):
            raise ConfigError(path, f"expected a number, got {value!r}") from None
        if not math.isfinite(f):
            raise ConfigError(path, f"expected a finite number, got {value!r}")
        return f
    if kind is str:
        if not isinstance(value, str):
            raise ConfigError(path, f"expected a string, got {value!r}")
        return value
    return value


_KINDS = {"float": float, "int": int, "str": str, "bool": bool, "dict": dict}


def _field_kind(f):
    name = f.type if isinstance(f.type, str) else getattr(f.type, "__name__", "")
    return _KINDS.get(name, object)


def _build_block(name, raw):
    cls = BLOCKS[name]
    if not isinstance(raw, dict):
        raise ConfigError(name, "expected a table")
    fields = {f.name: f for f in dataclasses.fields(cls)}
    unknown = sorted(set(raw) - set(fields))
    if unknown:
        raise ConfigError(f"{name}.{unknown[0]}", "unknown key")
    kwargs = {}
    for key, value in raw.items():
        path = f"{name}.{key}"
        kind = _field_kind(fields[key])
        if name == "cavity" and key == "L_cav" and value is None:
            kwargs[key] = None
        elif kind is dict:
            kwargs[key] = _grid(path, value)
        else:
            kwargs[key] = _coerce(path, value, kind)
    return cls(**kwargs)


def _grid(path, raw):
    """Sweep grid: each axis is a list of values or ``{start, stop, num}``."""
    if not isinstance(raw, dict):
        raise ConfigError(path, "expected a table of axes")
    out = {}
    for axis, spec in raw.items():
        p = f"{path}.{axis}"
        if axis not in SWEEP_AXES:
            raise ConfigError(p, f"unknown sweep axis (allowed: {', '.join(SWEEP_AXES)})")
        if isinstance(spec, dict):
            extra = set(spec) - {"start", "stop", "num"}
            if extra or len(spec) != 3:
                raise ConfigError(p, "a range needs exactly start, stop and num")
            start = _coerce(p + ".start", spec["start"], float)
            stop = _coerce(p + ".stop", spec["stop"], float)
            num = _coerce(p + ".num", spec["num"], int)
            if num < 1:
                raise ConfigError(p + ".num", f"must be >= 1, got {num}")
            values = [start] if num == 1 else [start + (stop - start) * i / (num - 1) for i in range(num)]
        elif isinstance(spec, (list, tuple)):
            if not spec:
                raise ConfigError(p, "axis has no values")
            values = [_coerce(f"{p}[{i}]", v, float) for i, v in enumerate(spec)]
        else:
            values = [_coerce(p, spec, float)]
        out[axis] = values
    return out


def _require(cond, path, message):
    if not cond:
        raise ConfigError(path, message)


def validate(cfg):
    """Physical preconditions of every downstream operation."""
    u, cav, disp, pr, orc, sw, ro, out = (
        cfg.units, cfg.cavity, cfg.dispersion, cfg.protocol, cfg.oracle, cfg.sweep, cfg.readout, cfg.output
    )
    for key in ("hbar", "c", "g"):
        _require(getattr(u, key) > 0, f"units.{key}", f"must be > 0, got {getattr(u, key)}")
    _require(cav.E_at > 0, "cavity.E_at", f"must be > 0, got {cav.E_at}")
    _require(cav.L_cav is None or cav.L_cav > 0, "cavity.L_cav", f"must be > 0, got {cav.L_cav}")
    _require(cav.m >= 1, "cavity.m", f"must be >= 1, got {cav.m}")
    _require(disp.n_points >= 2, "dispersion.n_points", f"must be >= 2, got {disp.n_points}")
    _require(disp.k_par_max >= 0, "dispersion.k_par_max", f"must be >= 0, got {disp.k_par_max}")
    _require(disp.mode in ("exact", "paraxial"), "dispersion.mode", f"must be exact or paraxial, got {disp.mode!r}")
    _require(pr.V_in >= 1, "protocol.V_in", f"must be >= 1, got {pr.V_in}")
    _require(pr.gain >= 1, "protocol.gain", f"must be >= 1, got {pr.gain}")
    _require(pr.N >= 0, "protocol.N", f"must be >= 0, got {pr.N}")
    _require(0 <= pr.alpha2 <= 1, "protocol.alpha2", f"must lie in [0, 1], got {pr.alpha2}")
    _require(pr.convention in ("formula", "operator"), "protocol.convention",
             f"must be formula or operator, got {pr.convention!r}")
    _require(orc.cutoff >= 2, "oracle.cutoff", f"must be >= 2, got {orc.cutoff}")
    _require(orc.cap >= 8, "oracle.cap", f"must be >= 8, got {orc.cap}")
    _require(orc.tolerance > 0, "oracle.tolerance", f"must be > 0, got {orc.tolerance}")
    _require(orc.workers >= 1, "oracle.workers", f"must be >= 1, got {orc.workers}")
    _require(sw.cap >= 1, "sweep.cap", f"must be >= 1, got {sw.cap}")
    for axis, values in sw.grid.items():
        p = f"sweep.grid.{axis}"
        for v in values:
            if axis == "alpha2":
                _require(0 <= v <= 1, p, f"values must lie in [0, 1], got {v}")
            elif axis == "N":
                _require(v >= 0 and float(v).is_integer(), p, f"values must be non-negative integers, got {v}")
            elif axis in ("gain", "V_in"):
                _require(v >= 1, p, f"values must be >= 1, got {v}")
    n_points = math.prod(len(v) for v in sw.grid.values()) if sw.grid else 1
    _require(n_points <= sw.cap, "sweep.grid", f"{n_points} points exceed sweep.cap = {sw.cap}")
    _require(ro.t_max >= 0, "readout.t_max", f"must be >= 0, got {ro.t_max}")
    _require(ro.n_times >= 1, "readout.n_times", f"must be >= 1, got {ro.n_times}")
    _require(out.format in (None, "csv", "json"), "output.format", f"must be csv or json, got {out.format!r}")
    _require(1 <= out.precision <= 17, "output.precision", f"must lie in [1, 17], got {out.precision}")
    return cfg


def _set_path(tree, path, value):
    parts = path.split(".")
    if len(parts) < 2 or parts[0] not in BLOCKS:
        raise ConfigError(path, f"unknown field (blocks: {', '.join(BLOCKS)})")
    node = tree
    for p in parts[:-1]:
        node = node.setdefault(p, {})
        if not isinstance(node, dict):
            raise ConfigError(path, "not a table")
    node[parts[-1]] = value


def parse_assignment(text):
    """``block.key=value`` with the value read as a TOML literal when possible."""
    if "=" not in text:
        raise ConfigError(text, "override must look like block.key=value")
    path, raw = (s.strip() for s in text.split("=", 1))
    try:
        value = tomllib.loads(f"v = {raw}")["v"]
    except tomllib.TOMLDecodeError:
        value = raw
    return path, value


def load_config(path=None, overrides=()):
    """Read ``path`` (TOML; optional) and apply ``(dotted_path, value)`` overrides in order."""
    tree = {}
    if path is not None:
        try:
            with open(path, "rb") as fh:
                tree = tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(str(path), f"not valid TOML ({exc})") from None
    unknown = sorted(set(tree) - set(BLOCKS))
    if unknown:
        raise ConfigError(unknown[0], f"unknown block (blocks: {', '.join(BLOCKS)})")
    for dotted, value in overrides:
        _set_path(tree, dotted, value)
    blocks = {name: _build_block(name, tree[name]) for name in BLOCKS if name in tree}
    return validate(RunConfig(**blocks))

"""Mission configuration files.

INI-style, one section per component::

    [domain]
    lo = 5, 5
    hi = 25, 25
    inflation = 0.2, 0.2

    [points]
    kind = lattice
    m = 7

Domain coordinates are in domain units of ``unit`` meters each (default
100), so the square above is 2 km on a side. Angles are in degrees.
Unknown sections or keys are rejected, and every value is validated
before it reaches the numerical code.
"""

from __future__ import annotations

import configparser
import math
import re
from dataclasses import dataclass, replace
from pathlib import Path

from .bench import BatchConfig
from .dynamics import VehicleParams
from .geometry import ConvexQuad, DomainSpec, GeometryError, Rect, contains, scale_shape
from .lowdisc import PointSetError
from .optimizer import NlpSettings
from .relaxation import MissionRequest, PointSpec
from .risk import DEFAULT_ORACLE_SEED, ORACLE_LOG2
from .sensor import SensorParams


class ParseError(ValueError):
    pass


class ValidationError(ValueError):
    pass


DEFAULT_UNIT = 100.0

# key -> (type, default); angles marked "deg" are converted to radians
SCHEMA = {
    "domain": {
        "shape": (str, "rect"),
        "lo": ("pair", (5.0, 5.0)),
        "hi": ("pair", (25.0, 25.0)),
        "vertices": ("pairs", None),
        "inflation": ("pair", (0.2, 0.2)),
        "unit": (float, DEFAULT_UNIT),
        "start": ("pair", None),
        "heading": (float, 0.0),
    },
    "sensor": {
        "lam": (float, 20.0),
        "fom": (float, 72.0),
        "a": (float, 5.2),
        "sigma": (float, 9.0),
        "alpha_fov": (float, 120.0),
        "p_alpha": (float, 25.0),
        "eps_fov": (float, 5.0),
        "eps_de": (float, -6.0),
        "p_eps": (float, 400.0),
        "h": (float, 20.0),
        "range_norm": (str, "euclidean"),
    },
    "vehicle": {
        "v": (float, 2.5),
        "k_gain": (float, 5.0),
        "t_const": (float, 0.5),
        "p_max": (float, 35.0),
    },
    "points": {
        "kind": (str, "lattice"),
        "m": (int, 7),
        "seed": (int, 0),
        "n_shifts": (int, 1),
    },
    "solver": {
        "risk_tolerance": (float, 1e-3),
        "max_outer": (int, 20),
        "max_inner": (int, 200),
        "penalty_init": (float, 10.0),
        "penalty_growth": (float, 4.0),
        "grad_step": (float, 1e-6),
        "gradient": (str, "adjoint"),
        "n_knots": (int, 60),
        "steps_per_knot": (int, 4),
        "t_f_headroom": (float, 2.0),
        "workers": (int, 1),
    },
    "relaxation": {
        "m_risk": (float, 0.05),
        "max_inflations": (int, 50),
        "oracle_seed": (int, DEFAULT_ORACLE_SEED),
        "oracle_log2": (int, ORACLE_LOG2),
        "warm_start": (bool, False),
        "abort_on_not_converged": (bool, False),
    },
    "bench": {
        "runs": (int, 20),
        "kinds": ("list", ("lattice", "mc")),
        "seed_base": (int, 0),
        "mode": (str, "relaxed"),
        "workers": (int, 1),
        "start_jitter": (float, 0.0),
    },
}


@dataclass(frozen=True)
class MissionConfig:
    """Fully resolved configuration; domain geometry here is in meters."""

    domain: DomainSpec
    unit: float
    start: tuple[float, float]
    heading: float
    sensor: SensorParams
    vehicle: VehicleParams
    points: PointSpec
    settings: NlpSettings
    m_risk: float
    max_inflations: int
    oracle_seed: int
    oracle_log2: int
    warm_start: bool
    abort_on_not_converged: bool
    runs: int
    kinds: tuple[str, ...]
    seed_base: int
    mode: str
    bench_workers: int
    start_jitter: float
    raw: dict

    def request(self, seed: int | None = None) -> MissionRequest:
        pts = self.points if seed is None else replace(self.points, seed=seed)
        return MissionRequest(self.domain, self.start, self.m_risk, pts, self.max_inflations,
                              self.heading, self.oracle_seed, self.oracle_log2,
                              self.abort_on_not_converged)

    def batch(self, runs: int | None = None, seed_base: int | None = None) -> BatchConfig:
        return BatchConfig(self.request(), runs or self.runs, self.kinds,
                           self.seed_base if seed_base is None else seed_base, self.mode,
                           self.sensor, self.vehicle, self.settings, self.bench_workers,
                           self.start_jitter, self.warm_start)

    def to_units(self, shape):
        return scale_shape(shape, 1.0 / self.unit)

    def to_ini(self) -> str:
        """The resolved configuration in the input format."""
        lines = []
        for section, keys in self.raw.items():
            lines.append(f"[{section}]")
            for key, value in keys.items():
                if value is None:
                    continue
                lines.append(f"{key} = {_format(value)}")
            lines.append("")
        return "\n".join(lines)


def _format(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple) and value and isinstance(value[0], tuple):
        return "; ".join(", ".join(repr(float(c)) for c in p) for p in value)
    if isinstance(value, tuple):
        return ", ".join(v if isinstance(v, str) else repr(float(v)) for v in value)
    return str(value)


def _line_of(text: str, section: str, key: str | None) -> int | None:
    current = None
    for i, line in enumerate(text.splitlines(), 1):
        m = re.match(r"\s*\[([^\]]+)\]", line)
        if m:
            current = m.group(1).strip()
            if key is None and current == section:
                return i
            continue
        if current == section and key is not None and re.match(rf"\s*{re.escape(key)}\s*[=:]", line):
            return i
    return None


def _convert(kind, raw: str, where: str):
    try:
        if kind is float:
            v = float(raw)
            if not math.isfinite(v):
                raise ValueError
            return v
        if kind is int:
            return int(raw)
        if kind is bool:
            low = raw.strip().lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError
        if kind is str:
            return raw.strip()
        if kind == "pair":
            parts = [float(p) for p in re.split(r"[,\s]+", raw.strip()) if p]
            if len(parts) != 2:
                raise ValueError
            return tuple(parts)
        if kind == "pairs":
            pts = tuple(_convert("pair", p, where) for p in raw.split(";") if p.strip())
            return pts
        if kind == "list":
            return tuple(p for p in re.split(r"[,\s]+", raw.strip()) if p)
    except ValueError:
        raise ParseError(f"{where}: cannot read {raw!r} as {getattr(kind, '__name__', kind)}") from None
    raise AssertionError(kind)


def read_raw(text: str, source: str = "<config>") -> dict:
    """Typed values per section with defaults filled in, without cross-checks."""
    cp = configparser.ConfigParser(inline_comment_prefixes=("#",), interpolation=None,
                                   comment_prefixes=("#",))
    cp.optionxform = str
    try:
        cp.read_string(text, source)
    except configparser.Error as exc:
        raise ParseError(f"{source}: {exc}") from None
    out = {s: {k: d for k, (_, d) in keys.items()} for s, keys in SCHEMA.items()}
    for section in cp.sections():
        if section not in SCHEMA:
            line = _line_of(text, section, None)
            raise ParseError(f"{source}:{line}: unknown section [{section}]")
        for key, value in cp.items(section):
            line = _line_of(text, section, key)
            where = f"{source}:{line} [{section}] {key}"
            if key not in SCHEMA[section]:
                raise ParseError(f"{where}: unknown key {key!r}")
            out[section][key] = _convert(SCHEMA[section][key][0], value, where)
    return out


def _check(cond: bool, message: str):
    if not cond:
        raise ValidationError(message)


def build(raw: dict) -> MissionConfig:
    d, s, v = raw["domain"], raw["sensor"], raw["vehicle"]
    unit = d["unit"]
    _check(unit > 0, "[domain] unit must be positive")
    try:
        if d["shape"] == "rect":
            shape_u = Rect(d["lo"], d["hi"])
        elif d["shape"] == "quad":
            _check(d["vertices"] is not None and len(d["vertices"]) == 4,
                   "[domain] quad needs four vertices")
            shape_u = ConvexQuad(d["vertices"])
        else:
            raise ValidationError(f"[domain] shape must be rect or quad, got {d['shape']!r}")
        domain = DomainSpec(scale_shape(shape_u, unit), tuple(unit * x for x in d["inflation"]))
    except GeometryError as exc:
        raise ValidationError(f"[domain] {exc}") from None
    if d["start"] is None:
        from .relaxation import default_start
        start = default_start(domain)
        raw["domain"]["start"] = (start[0] / unit, start[1] / unit)
    else:
        start = (d["start"][0] * unit, d["start"][1] * unit)
        _check(contains(domain, start), "[domain] start must lie in the domain or on its boundary")

    _check(0 < s["alpha_fov"] < 360, "[sensor] alpha_fov must lie in (0, 360) degrees")
    _check(s["eps_fov"] > 0, "[sensor] eps_fov must be positive")
    try:
        sensor = SensorParams.from_degrees(**s)
        vehicle = VehicleParams(v["v"], v["k_gain"], v["t_const"], math.radians(v["p_max"]))
        settings = NlpSettings(**raw["solver"])
        points = PointSpec(raw["points"]["kind"], raw["points"]["m"], raw["points"]["seed"],
                           raw["points"]["n_shifts"])
    except (ValueError, PointSetError) as exc:
        raise ValidationError(str(exc)) from None
    _check(1 <= points.m <= 20, "[points] m must lie in [1, 20]")
    _check(points.n_shifts >= 1, "[points] n_shifts must be >= 1")
    r, b = raw["relaxation"], raw["bench"]
    _check(0 < r["m_risk"] < 1, "[relaxation] m_risk must lie in (0, 1)")
    _check(r["max_inflations"] >= 0, "[relaxation] max_inflations must be >= 0")
    _check(1 <= r["oracle_log2"] <= 24, "[relaxation] oracle_log2 must lie in [1, 24]")
    _check(b["runs"] >= 1, "[bench] runs must be >= 1")
    _check(b["mode"] in ("relaxed", "naive"), "[bench] mode must be relaxed or naive")
    _check(b["workers"] >= 1, "[bench] workers must be >= 1")
    _check(b["start_jitter"] >= 0, "[bench] start_jitter must be >= 0")
    try:
        from .lowdisc import canonical_kind
        kinds = tuple(canonical_kind(k) for k in b["kinds"])
    except PointSetError as exc:
        raise ValidationError(f"[bench] {exc}") from None
    _check(len(kinds) > 0, "[bench] kinds must be non-empty")
    return MissionConfig(domain, unit, start, math.radians(d["heading"]), sensor, vehicle, points,
                         settings, r["m_risk"], r["max_inflations"], r["oracle_seed"],
                         r["oracle_log2"], r["warm_start"], r["abort_on_not_converged"],
                         b["runs"], kinds, b["seed_base"], b["mode"], b["workers"],
                         b["start_jitter"], raw)


def parse_config_text(text: str, source: str = "<config>") -> MissionConfig:
    return build(read_raw(text, source))


def parse_config(path) -> MissionConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(f"{path}: {exc}") from None
    return parse_config_text(text, str(path))


def default_config() -> MissionConfig:
    return parse_config_text("")

"""
Scenario files: a YAML document with unit-suffixed keys describing the world,
the flock, aliens, obstacles and the seed. ``parse_scenario`` validates
everything up front and ``write_scenario`` emits a file that parses back to
an equal ``Scenario``.

Grammar (``schema_version: 1``)::

    schema_version: 1
    seed: 17
    world:
      dimension: 2                  # 2 or 3
      model: zone                   # zone | simplified
      measurement: bearing          # position | bearing | bearing-fd
      dt_s: 0.1
      total_time_s: 100.0
      desired_speed_m_s: 3.0
      bounds_min_m: [0, 0]          # optional pair; omit both for open space
      bounds_max_m: [50, 50]
    agents:
      count: 10
      init_position_range_m: [0, 10]
      init_velocity_range_m_s: [0, 1]
      informed: all                 # all | none | list of ids
      zones: {repulsion_radius_m, conflict_radius_m, attraction_radius_m, surveillance_radius_m}
      weights: {separation, cohesion, alignment, strategic_separation,
                obstacle_avoidance, global_speed, gain, pair: {rule: {id: w}}}
      limits: {max_control_m_s2, max_speed_m_s}     # optional
      states: [{id, position_m, velocity_m_s}]        # optional explicit initial states
      overrides: [{id, zones?, weights?, limits?}]    # optional per-agent parameters
    simplified:                     # required when model is simplified
      perception_radius_m: 10
      density_scale_per_m: 0.1      # optional, defaults to 1 / perception radius
      separation_cohesion_weight: 1
      alignment_weight: 1
      gain: 1
    aliens:
      - {id, containment_m: [[x, y], ...], detection_radius_m, max_speed_m_s, start_m?}
    obstacles:
      - {vertices_m: [[x, y], ...]}
    options: {...}                  # optional SimOptions overrides

Zone blocks inside ``overrides`` may be partial; missing keys inherit the
flock-wide values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Optional

import numpy as np
import yaml

from .behaviors import BehaviorWeights, Limits, VelocityEstimate
from .geometry import InvalidPolygon, Polygon
from .perception import Bounds, ZoneParams
from .sim import MEASUREMENTS, MODELS, AgentState, AlienState, SimOptions, World, steps_for
from .simplified import SimplifiedParams

SCHEMA_VERSION = 1

ZONE_KEYS = {
    "repulsion_radius_m": "r",
    "conflict_radius_m": "c",
    "attraction_radius_m": "a",
    "surveillance_radius_m": "s",
}
WEIGHT_KEYS = {
    "separation": "w_ls",
    "cohesion": "w_lc",
    "alignment": "w_la",
    "strategic_separation": "w_ss",
    "obstacle_avoidance": "w_oa",
    "global_speed": "w_ga",
    "gain": "gain",
}
PAIR_RULES = {"separation": "ls", "cohesion": "lc", "alignment": "la", "strategic_separation": "ss"}
LIMIT_KEYS = {"max_control_m_s2": "u_max", "max_speed_m_s": "v_max"}
OPTION_KEYS = {
    "strict_paper_mode": "strict_paper_mode",
    "triangle_scale": "triangle_scale",
    "triangle_edges": "triangle_edges",
    "cohesion_normalized": "cohesion_normalized",
    "velocity_bound": "velocity_bound",
    "velocity_estimator": "velocity_estimator",
    "grow_attraction": "grow_attraction",
    "growth_step_m": "growth_step",
    "max_attraction_m": "max_attraction",
    "alpha_smoothing": "alpha_smoothing",
    "simplified_extensions": "simplified_extensions",
}


class ScenarioError(Exception):
    """Base for scenario problems; carries the 1-based source line when known."""

    def __init__(self, message: str, line: Optional[int] = None, path: Optional[str] = None):
        self.message = message
        self.line = line
        self.path = path
        where = ""
        if path is not None:
            where = f"{path}:{line}: " if line is not None else f"{path}: "
        elif line is not None:
            where = f"line {line}: "
        super().__init__(where + message)


class ParseError(ScenarioError):
    pass


class ValidationError(ScenarioError):
    pass


class ScenarioIOError(ScenarioError):
    pass


@dataclass(frozen=True)
class AgentInit:
    id: int
    position: tuple
    velocity: tuple


@dataclass(frozen=True)
class AgentOverride:
    id: int
    zones: Optional[ZoneParams] = None
    weights: Optional[BehaviorWeights] = None
    limits: Optional[Limits] = None


@dataclass(frozen=True)
class AlienConfig:
    id: int
    containment: tuple
    detection_radius: float
    max_speed: float
    start: Optional[tuple] = None


@dataclass(frozen=True)
class Scenario:
    dimension: int
    model: str
    measurement: str
    dt: float
    total_time: float
    v_desired: float
    count: int
    init_position_range: tuple
    init_velocity_range: tuple
    zones: Optional[ZoneParams]
    weights: BehaviorWeights
    limits: Optional[Limits]
    informed: tuple
    seed: int = 0
    bounds: Optional[tuple] = None
    states: tuple = ()
    overrides: tuple = ()
    simplified: Optional[SimplifiedParams] = None
    aliens: tuple = ()
    obstacles: tuple = ()
    options: SimOptions = field(default_factory=SimOptions)
    schema_version: int = SCHEMA_VERSION

    @property
    def steps(self) -> int:
        return steps_for(self.total_time, self.dt)


# ---------------------------------------------------------------------------
# parsing
# ---------------------------------------------------------------------------


class _Ctx:
    """Maps key paths to source lines using the composed YAML node tree."""

    def __init__(self, root, path: Optional[str]):
        self.root = root
        self.path = path

    def line(self, keys: tuple) -> Optional[int]:
        node = self.root
        best = node.start_mark.line + 1 if node is not None else None
        for k in keys:
            if isinstance(node, yaml.MappingNode):
                nxt = None
                for kn, vn in node.value:
                    if str(kn.value) == str(k):
                        best = kn.start_mark.line + 1
                        nxt = vn
                        break
                if nxt is None:
                    return best
                node = nxt
            elif isinstance(node, yaml.SequenceNode) and isinstance(k, int) and 0 <= k < len(node.value):
                node = node.value[k]
                best = node.start_mark.line + 1
            else:
                return best
        return best

    def fail(self, keys: tuple, message: str) -> ValidationError:
        return ValidationError(f"{_dotted(keys)}: {message}", self.line(keys), self.path)


def _dotted(keys: tuple) -> str:
    out = ""
    for k in keys:
        out += f"[{k}]" if isinstance(k, int) else (f".{k}" if out else str(k))
    return out


def _mapping(ctx: _Ctx, value, keys: tuple, allowed: set, required: set = frozenset()) -> dict:
    if not isinstance(value, dict):
        raise ctx.fail(keys, f"expected a mapping, got {type(value).__name__}")
    for k in value:
        if k not in allowed:
            raise ctx.fail(keys + (k,), f"unknown key (allowed: {', '.join(sorted(map(str, allowed)))})")
    for k in required:
        if k not in value:
            raise ctx.fail(keys, f"missing required key {k!r}")
    return value


def _number(ctx: _Ctx, value, keys: tuple, positive: bool = False, nonneg: bool = False) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ctx.fail(keys, f"expected a number, got {value!r}")
    x = float(value)
    if not math.isfinite(x):
        raise ctx.fail(keys, f"must be finite, got {value!r}")
    if positive and not x > 0:
        raise ctx.fail(keys, f"must be > 0, got {value!r}")
    if nonneg and x < 0:
        raise ctx.fail(keys, f"must be >= 0, got {value!r}")
    return x


def _integer(ctx: _Ctx, value, keys: tuple, minimum: Optional[int] = None) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ctx.fail(keys, f"expected an integer, got {value!r}")
    if minimum is not None and value < minimum:
        raise ctx.fail(keys, f"must be >= {minimum}, got {value}")
    return int(value)


def _flag(ctx: _Ctx, value, keys: tuple) -> bool:
    if not isinstance(value, bool):
        raise ctx.fail(keys, f"expected true or false, got {value!r}")
    return value


def _vector(ctx: _Ctx, value, keys: tuple, length: int) -> tuple:
    if not isinstance(value, list) or len(value) != length:
        raise ctx.fail(keys, f"expected a list of {length} numbers, got {value!r}")
    return tuple(_number(ctx, x, keys + (i,)) for i, x in enumerate(value))


def _range(ctx: _Ctx, value, keys: tuple) -> tuple:
    lo, hi = _vector(ctx, value, keys, 2)
    if lo > hi:
        raise ctx.fail(keys, f"range must satisfy low <= high, got {value!r}")
    return (lo, hi)


def _polygon(ctx: _Ctx, value, keys: tuple) -> tuple:
    if not isinstance(value, list):
        raise ctx.fail(keys, "expected a list of [x, y] vertices")
    verts = tuple(_vector(ctx, v, keys + (i,), 2) for i, v in enumerate(value))
    try:
        Polygon(verts)
    except InvalidPolygon as exc:
        raise ctx.fail(keys, str(exc)) from None
    return verts


def _zones(ctx: _Ctx, value, keys: tuple, base: Optional[ZoneParams] = None) -> ZoneParams:
    required = set() if base is not None else set(ZONE_KEYS)
    raw = _mapping(ctx, value, keys, set(ZONE_KEYS), required)
    vals = {} if base is None else {"r": base.r, "c": base.c, "a": base.a, "s": base.s}
    for k, attr in ZONE_KEYS.items():
        if k in raw:
            vals[attr] = _number(ctx, raw[k], keys + (k,), positive=True)
    r, c, a, s = vals["r"], vals["c"], vals["a"], vals["s"]
    if not (r <= c <= a <= s):
        raise ctx.fail(
            keys,
            "zone ordering rule violated: need repulsion_radius_m <= conflict_radius_m <= "
            f"attraction_radius_m <= surveillance_radius_m, got {r} / {c} / {a} / {s}",
        )
    return ZoneParams(r, c, a, s)


def _weights(ctx: _Ctx, value, keys: tuple, base: Optional[BehaviorWeights] = None) -> BehaviorWeights:
    raw = _mapping(ctx, value, keys, set(WEIGHT_KEYS) | {"pair"})
    base = base if base is not None else BehaviorWeights()
    vals = {}
    for k, attr in WEIGHT_KEYS.items():
        if k in raw:
            vals[attr] = _number(ctx, raw[k], keys + (k,), positive=(k == "gain"), nonneg=True)
    if "pair" in raw:
        pkeys = keys + ("pair",)
        pair_raw = _mapping(ctx, raw["pair"], pkeys, set(PAIR_RULES))
        pair = {}
        for rule_name, table in pair_raw.items():
            tkeys = pkeys + (rule_name,)
            if not isinstance(table, dict):
                raise ctx.fail(tkeys, "expected a mapping of neighbor id to weight")
            pair[PAIR_RULES[rule_name]] = {
                _integer(ctx, j, tkeys, 0): _number(ctx, w, tkeys + (j,), nonneg=True) for j, w in table.items()
            }
        vals["pair"] = pair
    return replace(base, **vals)


def _limits(ctx: _Ctx, value, keys: tuple, base: Optional[Limits] = None) -> Limits:
    required = set() if base is not None else set(LIMIT_KEYS)
    raw = _mapping(ctx, value, keys, set(LIMIT_KEYS), required)
    vals = {} if base is None else {"u_max": base.u_max, "v_max": base.v_max}
    for k, attr in LIMIT_KEYS.items():
        if k in raw:
            vals[attr] = _number(ctx, raw[k], keys + (k,), positive=True)
    return Limits(**vals)


def _options(ctx: _Ctx, value, keys: tuple) -> SimOptions:
    raw = _mapping(ctx, value, keys, set(OPTION_KEYS))
    vals = {}
    for k, attr in OPTION_KEYS.items():
        if k not in raw:
            continue
        v = raw[k]
        if attr in ("strict_paper_mode", "triangle_edges", "cohesion_normalized", "simplified_extensions"):
            vals[attr] = _flag(ctx, v, keys + (k,))
        elif attr == "grow_attraction":
            vals[attr] = None if v is None else _flag(ctx, v, keys + (k,))
        elif attr in ("velocity_bound", "velocity_estimator"):
            if not isinstance(v, str):
                raise ctx.fail(keys + (k,), f"expected a string, got {v!r}")
            vals[attr] = v
        elif attr in ("max_attraction", "alpha_smoothing"):
            vals[attr] = None if v is None else _number(ctx, v, keys + (k,), positive=True)
        else:
            vals[attr] = _number(ctx, v, keys + (k,), positive=True)
    try:
        return SimOptions(**vals)
    except ValueError as exc:
        raise ctx.fail(keys, str(exc)) from None


def _choice(ctx: _Ctx, value, keys: tuple, allowed: tuple) -> str:
    if value not in allowed:
        raise ctx.fail(keys, f"must be one of {', '.join(allowed)}, got {value!r}")
    return value


def _scenario_from_data(data: Any, ctx: _Ctx) -> Scenario:
    top = _mapping(
        ctx, data, (),
        {"schema_version", "seed", "world", "agents", "simplified", "aliens", "obstacles", "options"},
        {"schema_version", "world", "agents"},
    )
    version = _integer(ctx, top["schema_version"], ("schema_version",))
    if version != SCHEMA_VERSION:
        raise ctx.fail(("schema_version",), f"unsupported schema version {version} (expected {SCHEMA_VERSION})")
    seed = _integer(ctx, top.get("seed", 0), ("seed",), 0)

    wk = ("world",)
    world = _mapping(
        ctx, top["world"], wk,
        {"dimension", "model", "measurement", "dt_s", "total_time_s", "desired_speed_m_s", "bounds_min_m", "bounds_max_m"},
        {"dimension", "dt_s", "total_time_s"},
    )
    dim = _integer(ctx, world["dimension"], wk + ("dimension",))
    if dim not in (2, 3):
        raise ctx.fail(wk + ("dimension",), f"must be 2 or 3, got {dim}")
    model = _choice(ctx, world.get("model", "zone"), wk + ("model",), MODELS)
    measurement = _choice(ctx, world.get("measurement", "bearing"), wk + ("measurement",), MEASUREMENTS)
    dt = _number(ctx, world["dt_s"], wk + ("dt_s",), positive=True)
    total = _number(ctx, world["total_time_s"], wk + ("total_time_s",), positive=True)
    if steps_for(total, dt) < 1:
        raise ctx.fail(wk + ("total_time_s",), f"must cover at least one step of {dt} s")
    v_d = _number(ctx, world.get("desired_speed_m_s", 0.0), wk + ("desired_speed_m_s",), nonneg=True)
    bounds = None
    if ("bounds_min_m" in world) != ("bounds_max_m" in world):
        raise ctx.fail(wk, "bounds_min_m and bounds_max_m must be given together")
    if "bounds_min_m" in world:
        lo = _vector(ctx, world["bounds_min_m"], wk + ("bounds_min_m",), dim)
        hi = _vector(ctx, world["bounds_max_m"], wk + ("bounds_max_m",), dim)
        if not all(a < b for a, b in zip(lo, hi)):
            raise ctx.fail(wk + ("bounds_max_m",), f"bounds must satisfy min < max componentwise, got {lo} / {hi}")
        bounds = (lo, hi)

    simplified = None
    if "simplified" in top:
        sk = ("simplified",)
        s_raw = _mapping(
            ctx, top["simplified"], sk,
            {"perception_radius_m", "density_scale_per_m", "separation_cohesion_weight", "alignment_weight", "gain"},
            {"perception_radius_m"},
        )
        r = _number(ctx, s_raw["perception_radius_m"], sk + ("perception_radius_m",), positive=True)
        beta = s_raw.get("density_scale_per_m")
        simplified = SimplifiedParams(
            r=r,
            beta=None if beta is None else _number(ctx, beta, sk + ("density_scale_per_m",), positive=True),
            w_sc=_number(ctx, s_raw.get("separation_cohesion_weight", 1.0), sk + ("separation_cohesion_weight",), nonneg=True),
            w_a=_number(ctx, s_raw.get("alignment_weight", 1.0), sk + ("alignment_weight",), nonneg=True),
            gain=_number(ctx, s_raw.get("gain", 1.0), sk + ("gain",), positive=True),
        )
    if model == "simplified" and simplified is None:
        raise ctx.fail(("world", "model"), "model 'simplified' needs a top-level 'simplified' block")

    ak = ("agents",)
    agents = _mapping(
        ctx, top["agents"], ak,
        {"count", "init_position_range_m", "init_velocity_range_m_s", "informed", "zones", "weights", "limits", "states", "overrides"},
        {"count", "init_position_range_m", "init_velocity_range_m_s"},
    )
    n = _integer(ctx, agents["count"], ak + ("count",), 1)
    pos_range = _range(ctx, agents["init_position_range_m"], ak + ("init_position_range_m",))
    vel_range = _range(ctx, agents["init_velocity_range_m_s"], ak + ("init_velocity_range_m_s",))
    zones = None
    if "zones" in agents:
        zones = _zones(ctx, agents["zones"], ak + ("zones",))
    elif model == "zone":
        raise ctx.fail(ak, "missing required key 'zones' for the zone model")
    weights = _weights(ctx, agents.get("weights", {}), ak + ("weights",))
    limits = _limits(ctx, agents["limits"], ak + ("limits",)) if "limits" in agents else None

    informed_raw = agents.get("informed", "none")
    if informed_raw == "all":
        informed = tuple(range(n))
    elif informed_raw == "none":
        informed = ()
    elif isinstance(informed_raw, list):
        informed = tuple(sorted({_integer(ctx, j, ak + ("informed", i), 0) for i, j in enumerate(informed_raw)}))
    else:
        raise ctx.fail(ak + ("informed",), f"expected 'all', 'none' or a list of ids, got {informed_raw!r}")
    if any(j >= n for j in informed):
        raise ctx.fail(ak + ("informed",), f"agent ids must lie in 0..{n - 1}")

    states = []
    for i, st in enumerate(agents.get("states", []) or []):
        sk = ak + ("states", i)
        st = _mapping(ctx, st, sk, {"id", "position_m", "velocity_m_s"}, {"id", "position_m", "velocity_m_s"})
        j = _integer(ctx, st["id"], sk + ("id",), 0)
        if j >= n:
            raise ctx.fail(sk + ("id",), f"agent id must lie in 0..{n - 1}, got {j}")
        states.append(AgentInit(j, _vector(ctx, st["position_m"], sk + ("position_m",), dim),
                                _vector(ctx, st["velocity_m_s"], sk + ("velocity_m_s",), dim)))
    if len({s.id for s in states}) != len(states):
        raise ctx.fail(ak + ("states",), "duplicate agent id")

    overrides = []
    for i, ov in enumerate(agents.get("overrides", []) or []):
        ok = ak + ("overrides", i)
        ov = _mapping(ctx, ov, ok, {"id", "zones", "weights", "limits"}, {"id"})
        j = _integer(ctx, ov["id"], ok + ("id",), 0)
        if j >= n:
            raise ctx.fail(ok + ("id",), f"agent id must lie in 0..{n - 1}, got {j}")
        oz = None
        if "zones" in ov:
            if zones is None:
                raise ctx.fail(ok + ("zones",), "zone overrides need a flock-wide zones block")
            oz = _zones(ctx, ov["zones"], ok + ("zones",), zones)
        ow = _weights(ctx, ov["weights"], ok + ("weights",), weights) if "weights" in ov else None
        ol = _limits(ctx, ov["limits"], ok + ("limits",), limits) if "limits" in ov else None
        overrides.append(AgentOverride(j, oz, ow, ol))
    if len({o.id for o in overrides}) != len(overrides):
        raise ctx.fail(ak + ("overrides",), "duplicate agent id")

    aliens = []
    for i, al in enumerate(top.get("aliens", []) or []):
        kk = ("aliens", i)
        al = _mapping(ctx, al, kk, {"id", "containment_m", "detection_radius_m", "max_speed_m_s", "start_m"},
                      {"containment_m", "detection_radius_m", "max_speed_m_s"})
        poly = _polygon(ctx, al["containment_m"], kk + ("containment_m",))
        start = None
        if "start_m" in al:
            start = _vector(ctx, al["start_m"], kk + ("start_m",), 2)
            if not Polygon(poly).contains(np.array(start)):
                raise ctx.fail(kk + ("start_m",), "alien must start inside its containment polygon")
        aliens.append(AlienConfig(
            _integer(ctx, al.get("id", i), kk + ("id",), 0),
            poly,
            _number(ctx, al["detection_radius_m"], kk + ("detection_radius_m",), nonneg=True),
            _number(ctx, al["max_speed_m_s"], kk + ("max_speed_m_s",), nonneg=True),
            start,
        ))
    if len({a.id for a in aliens}) != len(aliens):
        raise ctx.fail(("aliens",), "duplicate alien id")
    if (aliens or top.get("obstacles")) and dim != 2:
        raise ctx.fail(("world", "dimension"), "aliens and obstacles are only supported in 2D")

    obstacles = []
    for i, ob in enumerate(top.get("obstacles", []) or []):
        ok = ("obstacles", i)
        ob = _mapping(ctx, ob, ok, {"vertices_m"}, {"vertices_m"})
        obstacles.append(_polygon(ctx, ob["vertices_m"], ok + ("vertices_m",)))

    options = _options(ctx, top["options"], ("options",)) if "options" in top else SimOptions()

    return Scenario(
        dimension=dim, model=model, measurement=measurement, dt=dt, total_time=total, v_desired=v_d,
        count=n, init_position_range=pos_range, init_velocity_range=vel_range, zones=zones,
        weights=weights, limits=limits, informed=informed, seed=seed, bounds=bounds,
        states=tuple(sorted(states, key=lambda s: s.id)), overrides=tuple(sorted(overrides, key=lambda o: o.id)),
        simplified=simplified, aliens=tuple(aliens), obstacles=tuple(obstacles), options=options,
        schema_version=version,
    )


def parse_scenario_text(text: str, path: Optional[str] = None) -> Scenario:
    try:
        root = yaml.compose(text, Loader=yaml.SafeLoader)
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        line = mark.line + 1 if mark is not None else None
        problem = getattr(exc, "problem", None) or str(exc)
        raise ParseError(f"malformed scenario: {problem}", line, path) from None
    if data is None:
        raise ParseError("scenario file is empty", None, path)
    return _scenario_from_data(data, _Ctx(root, path))


def parse_scenario(path) -> Scenario:
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise ScenarioIOError(f"cannot read scenario: {exc.strerror or exc}", None, str(p)) from None
    return parse_scenario_text(text, str(p))


# ---------------------------------------------------------------------------
# writing
# ---------------------------------------------------------------------------


def _num(x: float):
    return int(x) if float(x).is_integer() and abs(x) < 2**53 else float(x)


def _vec_out(v) -> list:
    return [_num(x) for x in v]


def _zones_out(z: ZoneParams) -> dict:
    return {k: _num(getattr(z, attr)) for k, attr in ZONE_KEYS.items()}


def _weights_out(w: BehaviorWeights) -> dict:
    out = {k: _num(getattr(w, attr)) for k, attr in WEIGHT_KEYS.items()}
    if w.pair:
        names = {v: k for k, v in PAIR_RULES.items()}
        out["pair"] = {names[rule]: {int(j): _num(x) for j, x in sorted(t.items())} for rule, t in sorted(w.pair.items())}
    return out


def _limits_out(lim: Limits) -> dict:
    return {k: _num(getattr(lim, attr)) for k, attr in LIMIT_KEYS.items()}


def scenario_to_data(scn: Scenario) -> dict:
    world = {
        "dimension": scn.dimension,
        "model": scn.model,
        "measurement": scn.measurement,
        "dt_s": _num(scn.dt),
        "total_time_s": _num(scn.total_time),
        "desired_speed_m_s": _num(scn.v_desired),
    }
    if scn.bounds is not None:
        world["bounds_min_m"] = _vec_out(scn.bounds[0])
        world["bounds_max_m"] = _vec_out(scn.bounds[1])
    agents: dict = {
        "count": scn.count,
        "init_position_range_m": _vec_out(scn.init_position_range),
        "init_velocity_range_m_s": _vec_out(scn.init_velocity_range),
    }
    if len(scn.informed) == scn.count:
        agents["informed"] = "all"
    elif not scn.informed:
        agents["informed"] = "none"
    else:
        agents["informed"] = list(scn.informed)
    if scn.zones is not None:
        agents["zones"] = _zones_out(scn.zones)
    agents["weights"] = _weights_out(scn.weights)
    if scn.limits is not None:
        agents["limits"] = _limits_out(scn.limits)
    if scn.states:
        agents["states"] = [
            {"id": s.id, "position_m": _vec_out(s.position), "velocity_m_s": _vec_out(s.velocity)} for s in scn.states
        ]
    if scn.overrides:
        rows = []
        for o in scn.overrides:
            row: dict = {"id": o.id}
            if o.zones is not None:
                row["zones"] = _zones_out(o.zones)
            if o.weights is not None:
                row["weights"] = _weights_out(o.weights)
            if o.limits is not None:
                row["limits"] = _limits_out(o.limits)
            rows.append(row)
        agents["overrides"] = rows
    data: dict = {"schema_version": scn.schema_version, "seed": scn.seed, "world": world, "agents": agents}
    if scn.simplified is not None:
        sp = scn.simplified
        data["simplified"] = {
            "perception_radius_m": _num(sp.r),
            "density_scale_per_m": float(sp.beta),
            "separation_cohesion_weight": _num(sp.w_sc),
            "alignment_weight": _num(sp.w_a),
            "gain": _num(sp.gain),
        }
    if scn.aliens:
        rows = []
        for al in scn.aliens:
            row = {
                "id": al.id,
                "containment_m": [_vec_out(v) for v in al.containment],
                "detection_radius_m": _num(al.detection_radius),
                "max_speed_m_s": _num(al.max_speed),
            }
            if al.start is not None:
                row["start_m"] = _vec_out(al.start)
            rows.append(row)
        data["aliens"] = rows
    if scn.obstacles:
        data["obstacles"] = [{"vertices_m": [_vec_out(v) for v in poly]} for poly in scn.obstacles]
    default = SimOptions()
    opts = {}
    for k, attr in OPTION_KEYS.items():
        v = getattr(scn.options, attr)
        if v != getattr(default, attr):
            opts[k] = _num(v) if isinstance(v, float) else v
    if opts:
        data["options"] = opts
    return data


def dump_scenario(scn: Scenario) -> str:
    return yaml.safe_dump(scenario_to_data(scn), sort_keys=False, default_flow_style=None)


def write_scenario(scn: Scenario, path) -> None:
    p = Path(path)
    try:
        p.write_text(dump_scenario(scn), encoding="utf-8")
    except OSError as exc:
        raise ScenarioIOError(f"cannot write scenario: {exc.strerror or exc}", None, str(p)) from None


# ---------------------------------------------------------------------------
# world construction
# ---------------------------------------------------------------------------


def build_world(scn: Scenario, seed: Optional[int] = None) -> World:
    """
    Instantiate the world. Initial positions, then velocities, are drawn
    uniformly per component from the configured ranges; explicit states
    replace the draws for their agents without shifting anyone else's.
    """
    rng = np.random.default_rng(scn.seed if seed is None else seed)
    n, d = scn.count, scn.dimension
    P = rng.uniform(*scn.init_position_range, size=(n, d))
    V = rng.uniform(*scn.init_velocity_range, size=(n, d))
    for st in scn.states:
        P[st.id] = st.position
        V[st.id] = st.velocity

    if scn.zones is not None:
        base_zones = scn.zones
    else:
        r = scn.simplified.r
        base_zones = ZoneParams(r, r, r, r)
    overrides = {o.id: o for o in scn.overrides}
    informed = set(scn.informed)
    agents = []
    for i in range(n):
        o = overrides.get(i)
        agents.append(AgentState(
            id=i,
            pos=P[i].copy(),
            vel=V[i].copy(),
            zones=o.zones if o is not None and o.zones is not None else base_zones,
            weights=o.weights if o is not None and o.weights is not None else scn.weights,
            limits=o.limits if o is not None and o.limits is not None else scn.limits,
            v_estimate=VelocityEstimate(V[i].copy(), V[i].copy(), scn.dt),
            informed=i in informed,
        ))
    aliens = []
    for al in scn.aliens:
        poly = Polygon(al.containment)
        start = np.array(al.start, dtype=float) if al.start is not None else poly.vertices.mean(axis=0)
        aliens.append(AlienState(al.id, start, np.zeros(2), al.max_speed, poly, al.detection_radius))
    bounds = None
    if scn.bounds is not None:
        bounds = Bounds(np.array(scn.bounds[0], dtype=float), np.array(scn.bounds[1], dtype=float))
    return World(
        agents=agents, aliens=aliens, obstacles=[Polygon(v) for v in scn.obstacles], bounds=bounds,
        dt=scn.dt, model=scn.model, measurement=scn.measurement, v_desired=scn.v_desired,
        options=scn.options, simplified=scn.simplified,
    )


def shipped_scenarios() -> dict:
    """Name -> path of the scenario files installed with the package."""
    root = Path(__file__).parent / "scenarios"
    return {p.stem: p for p in sorted(root.glob("*.scn"))}


def with_overrides(scn: Scenario, **changes) -> Scenario:
    """Copy with top-level fields replaced (``options`` entries go through ``options=``)."""
    valid = {f.name for f in fields(Scenario)}
    bad = set(changes) - valid
    if bad:
        raise ValueError(f"unknown scenario fields: {sorted(bad)}")
    return replace(scn, **changes)

"""Scenario files: YAML documents with a fixed schema and per-field defaults.

Example::

    name: desk_64sta
    ue_count: 64
    duration: 600
    epoch: 1.0
    seeds: [1, 2, 3, 4, 5]
    area: {width: 300, height: 300}
    mobility: {speed_min: 1.0, speed_max: 3.0}
    link: {base_delay_5g: 0.025, base_delay_wifi: 0.015, delay_per_station: 0.0007,
           jitter: 0.002, rate_cap: 78.0}
    propagation: {exponent: 3.5, reference_distance: 1.0, shadowing_sigma: 0.0}
    topology: default           # or a list of nodes, see below
    policy:
      guard: {rssi_threshold: -85, enabled: true, inclusive: false}
      ahp_pairwise: rssi_first  # preset name or a full square matrix
      rssi_hysteresis_db: 0.0
      load_view: prospective    # or instantaneous

``load_view: prospective`` charges every candidate other than the UE's
current node one extra station (and the matching delay), so a UE compares
nodes as they would be with it attached. ``instantaneous`` feeds the raw
counts, which include the UE itself on its current node only.

An explicit topology is a list of ``{id, rat, position: [x, y]}`` mappings;
``tx_power``, ``frequency``, ``range`` and ``capacity`` fall back to the RAT
defaults. Unknown keys anywhere are an error.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any

import yaml

from ..mcdm import MCDMError, PairwiseMatrix
from ..policy import PAIRWISE_PRESETS, GuardConfig
from ..radio import AccessNode, PropagationConfig, Rat
from ..simnet import LinkModelConfig, MobilityConfig, default_topology


class ScenarioError(ValueError):
    def __init__(self, problems: list[str], source: str = "<scenario>"):
        self.problems = problems
        self.source = source
        super().__init__(f"{source}: " + "; ".join(problems))


TOP_KEYS = {"name", "ue_count", "duration", "epoch", "seeds", "area", "mobility", "link", "propagation", "topology", "policy"}
AREA_KEYS = {"width", "height"}
MOBILITY_KEYS = {"speed_min", "speed_max"}
LINK_KEYS = {"base_delay_5g", "base_delay_wifi", "delay_per_station", "jitter", "rate_cap"}
PROPAGATION_KEYS = {"exponent", "reference_distance", "shadowing_sigma"}
POLICY_KEYS = {"guard", "ahp_pairwise", "rssi_hysteresis_db", "load_view"}
LOAD_VIEWS = ("prospective", "instantaneous")
GUARD_KEYS = {"rssi_threshold", "enabled", "inclusive"}
NODE_KEYS = {"id", "rat", "position", "tx_power", "frequency", "range", "capacity"}


@dataclass(frozen=True)
class PolicySettings:
    guard: GuardConfig = GuardConfig()
    ahp_pairwise: Any = "rssi_first"
    rssi_hysteresis_db: float = 0.0
    load_view: str = "prospective"

    def pairwise(self) -> PairwiseMatrix:
        if isinstance(self.ahp_pairwise, str):
            return PAIRWISE_PRESETS[self.ahp_pairwise]
        return PairwiseMatrix(self.ahp_pairwise)


@dataclass(frozen=True)
class Scenario:
    name: str = "custom"
    ue_count: int = 16
    duration: float = 3600.0
    epoch: float = 1.0
    seeds: tuple[int, ...] = tuple(range(1, 16))
    mobility: MobilityConfig = MobilityConfig()
    link: LinkModelConfig = LinkModelConfig()
    propagation: PropagationConfig = PropagationConfig()
    nodes: tuple[AccessNode, ...] = field(default_factory=lambda: tuple(default_topology()))
    policy: PolicySettings = PolicySettings()

    @property
    def epochs(self) -> int:
        return int(round(self.duration / self.epoch))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["seeds"] = list(self.seeds)
        d["nodes"] = [{**asdict(n), "rat": n.rat.value, "position": list(n.position)} for n in self.nodes]
        g = d["policy"]["guard"]
        d["policy"]["guard"] = dict(g)
        return d

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, default=str).encode()
        return hashlib.sha256(blob).hexdigest()

    def with_overrides(self, **kw) -> "Scenario":
        from dataclasses import replace

        return replace(self, **kw)


def _section(raw: Any, keys: set[str], where: str, problems: list[str]) -> dict:
    if raw is None:
        return {}
    if not isinstance(raw, dict):
        problems.append(f"{where}: expected a mapping, got {type(raw).__name__}")
        return {}
    unknown = sorted(set(raw) - keys)
    for k in unknown:
        problems.append(f"{where}.{k}: unknown key")
    return {k: v for k, v in raw.items() if k in keys}


def _number(v, where, problems, kind=float):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        problems.append(f"{where}: expected a number, got {v!r}")
        return None
    if kind is int and int(v) != v:
        problems.append(f"{where}: expected an integer, got {v!r}")
        return None
    return kind(v)


def _build(cls, values: dict, where: str, problems: list[str]):
    typed = {}
    for k, v in values.items():
        if isinstance(v, bool) and cls is GuardConfig and k in ("enabled", "inclusive"):
            typed[k] = v
            continue
        if cls is GuardConfig and k in ("enabled", "inclusive"):
            problems.append(f"{where}.{k}: expected true/false, got {v!r}")
            continue
        n = _number(v, f"{where}.{k}", problems)
        if n is not None:
            typed[k] = n
    try:
        return cls(**typed)
    except ValueError as exc:
        problems.append(f"{where}: {exc}")
        return cls()


def scenario_from_dict(raw: Any, source: str = "<scenario>") -> Scenario:
    problems: list[str] = []
    top = _section(raw if raw is not None else {}, TOP_KEYS, "scenario", problems)
    kw: dict[str, Any] = {}

    if "name" in top:
        kw["name"] = str(top["name"])
    if "ue_count" in top:
        n = _number(top["ue_count"], "ue_count", problems, int)
        if n is not None and n < 1:
            problems.append("ue_count: must be >= 1")
        elif n is not None:
            kw["ue_count"] = n
    for key in ("duration", "epoch"):
        if key in top:
            v = _number(top[key], key, problems)
            if v is not None and v <= 0:
                problems.append(f"{key}: must be > 0")
            elif v is not None:
                kw[key] = v
    if "seeds" in top:
        seeds = top["seeds"]
        if not isinstance(seeds, list) or not seeds:
            problems.append("seeds: expected a non-empty list of integers")
        else:
            vals = [_number(s, f"seeds[{i}]", problems, int) for i, s in enumerate(seeds)]
            if None not in vals:
                kw["seeds"] = tuple(vals)

    area = _section(top.get("area"), AREA_KEYS, "area", problems)
    mob = _section(top.get("mobility"), MOBILITY_KEYS, "mobility", problems)
    kw["mobility"] = _build(MobilityConfig, {**area, **mob, "dt": kw.get("epoch", 1.0)}, "mobility", problems)
    kw["link"] = _build(LinkModelConfig, _section(top.get("link"), LINK_KEYS, "link", problems), "link", problems)
    kw["propagation"] = _build(
        PropagationConfig, _section(top.get("propagation"), PROPAGATION_KEYS, "propagation", problems), "propagation", problems
    )

    topo = top.get("topology", "default")
    if topo == "default":
        kw["nodes"] = tuple(default_topology(kw["mobility"].width, kw["mobility"].height))
    elif isinstance(topo, list):
        kw["nodes"] = tuple(_nodes(topo, problems))
    else:
        problems.append(f"topology: expected 'default' or a list of nodes, got {topo!r}")

    pol = _section(top.get("policy"), POLICY_KEYS, "policy", problems)
    pkw: dict[str, Any] = {}
    if "guard" in pol:
        pkw["guard"] = _build(GuardConfig, _section(pol["guard"], GUARD_KEYS, "policy.guard", problems), "policy.guard", problems)
    if "ahp_pairwise" in pol:
        pw = pol["ahp_pairwise"]
        if isinstance(pw, str):
            if pw not in PAIRWISE_PRESETS:
                problems.append(f"policy.ahp_pairwise: unknown preset {pw!r} (have {sorted(PAIRWISE_PRESETS)})")
            else:
                pkw["ahp_pairwise"] = pw
        else:
            try:
                PairwiseMatrix(pw)
                pkw["ahp_pairwise"] = tuple(tuple(float(x) for x in row) for row in pw)
            except (MCDMError, TypeError, ValueError) as exc:
                problems.append(f"policy.ahp_pairwise: {exc}")
    if "rssi_hysteresis_db" in pol:
        v = _number(pol["rssi_hysteresis_db"], "policy.rssi_hysteresis_db", problems)
        if v is not None:
            pkw["rssi_hysteresis_db"] = v
    if "load_view" in pol:
        if pol["load_view"] not in LOAD_VIEWS:
            problems.append(f"policy.load_view: expected one of {list(LOAD_VIEWS)}, got {pol['load_view']!r}")
        else:
            pkw["load_view"] = pol["load_view"]
    kw["policy"] = PolicySettings(**pkw)

    if problems:
        raise ScenarioError(problems, source)
    return Scenario(**kw)


def _nodes(raw: list, problems: list[str]) -> list[AccessNode]:
    out = []
    seen = set()
    for i, item in enumerate(raw):
        where = f"topology[{i}]"
        entry = _section(item, NODE_KEYS, where, problems)
        missing = {"id", "rat", "position"} - set(entry)
        if missing:
            problems.append(f"{where}: missing {sorted(missing)}")
            continue
        try:
            rat = Rat(entry["rat"])
        except ValueError:
            problems.append(f"{where}.rat: expected one of {[r.value for r in Rat]}")
            continue
        pos = entry["position"]
        if not (isinstance(pos, list) and len(pos) == 2):
            problems.append(f"{where}.position: expected [x, y]")
            continue
        if entry["id"] in seen:
            problems.append(f"{where}.id: duplicate {entry['id']!r}")
            continue
        seen.add(entry["id"])
        extra = {k: entry[k] for k in ("tx_power", "frequency", "range", "capacity") if k in entry}
        try:
            out.append(AccessNode.of_rat(str(entry["id"]), rat, (float(pos[0]), float(pos[1])), **extra))
        except (TypeError, ValueError) as exc:
            problems.append(f"{where}: {exc}")
    if out and not any(n.rat is Rat.FIVE_G for n in out):
        problems.append("topology: needs at least one 5G node")
    return out


def preset_names() -> list[str]:
    root = resources.files("chrome_handover.harness") / "presets"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".yaml"))


def load_scenario(path: str | Path) -> Scenario:
    """Load a scenario file, or a shipped preset by bare name (``desk_64sta``)."""
    p = Path(path)
    if p.exists():
        text, source = p.read_text(), str(p)
    elif str(path) in preset_names():
        res = resources.files("chrome_handover.harness") / "presets" / f"{path}.yaml"
        text, source = res.read_text(), f"preset:{path}"
    else:
        raise FileNotFoundError(f"no scenario file or preset named {path!r}")
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f"line {mark.line + 1}, column {mark.column + 1}" if mark else "unknown position"
        raise ScenarioError([f"parse error at {where}: {getattr(exc, 'problem', exc)}"], source) from exc
    return scenario_from_dict(raw, source)

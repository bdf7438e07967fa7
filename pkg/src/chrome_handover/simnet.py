"""Time-stepped multi-RAT world: mobility, attachment bookkeeping, link models."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace

import numpy as np

from .mcdm import HANDOVER_CRITERIA, DecisionMatrix
from .metrics import CrossRat, HandoverEvent
from .radio import AccessNode, Position, PropagationConfig, Rat, in_coverage, rssi_dbm

log = logging.getLogger(__name__)

MIN_DELAY = 1e-6


class NoLinkError(RuntimeError):
    pass


class NoCandidateError(RuntimeError):
    pass


@dataclass
class Ue:
    id: str
    position: Position
    speed: float
    heading: float
    attached: str | None = None
    stream: int = 0


@dataclass(frozen=True)
class MobilityConfig:
    width: float = 300.0
    height: float = 300.0
    speed_min: float = 1.0
    speed_max: float = 3.0
    dt: float = 1.0

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise ValueError("mobility area must be positive")
        if not 0 < self.speed_min <= self.speed_max:
            raise ValueError("need 0 < speed_min <= speed_max")
        if self.dt <= 0:
            raise ValueError("dt must be positive")

    @property
    def center(self) -> Position:
        return (self.width / 2, self.height / 2)

    def contains(self, pos: Position) -> bool:
        return 0.0 <= pos[0] <= self.width and 0.0 <= pos[1] <= self.height


@dataclass(frozen=True)
class LinkModelConfig:
    base_delay_5g: float = 0.025
    base_delay_wifi: float = 0.015
    delay_per_station: float = 0.0007
    jitter: float = 0.002
    rate_cap: float = 78.0

    def __post_init__(self):
        for name in ("base_delay_5g", "base_delay_wifi", "delay_per_station", "jitter", "rate_cap"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")

    def base_delay(self, rat: Rat) -> float:
        return self.base_delay_5g if rat is Rat.FIVE_G else self.base_delay_wifi


def default_topology(width: float = 300.0, height: float = 300.0) -> list[AccessNode]:
    """One gNB at the centre, APs AP2..AP15 on two rings (6 at 50 m, 8 at 100 m)."""
    cx, cy = width / 2, height / 2
    nodes = [AccessNode.gnb("gNB", (cx, cy))]
    k = 2
    for radius, count, phase in ((50.0, 6, 0.0), (100.0, 8, math.pi / 8)):
        for i in range(count):
            a = phase + 2 * math.pi * i / count
            nodes.append(AccessNode.wifi_ap(f"AP{k}", (cx + radius * math.cos(a), cy + radius * math.sin(a))))
            k += 1
    return nodes


class World:
    """Mutable replica state: nodes, UEs, clock and the attachment table."""

    def __init__(
        self,
        nodes: list[AccessNode],
        ues: list[Ue] = (),
        propagation: PropagationConfig = PropagationConfig(),
        link: LinkModelConfig = LinkModelConfig(),
    ):
        self.nodes: dict[str, AccessNode] = {}
        for n in nodes:
            if n.id in self.nodes:
                raise ValueError(f"duplicate node id {n.id}")
            self.nodes[n.id] = n
        self.ues: dict[str, Ue] = {}
        self.attachments: dict[str, set[str]] = {nid: set() for nid in self.nodes}
        self.propagation = propagation
        self.link = link
        self.clock = 0.0
        for ue in ues:
            self.add_ue(ue)

    def add_ue(self, ue: Ue) -> None:
        if ue.id in self.ues:
            raise ValueError(f"duplicate UE id {ue.id}")
        self.ues[ue.id] = ue
        if ue.attached is not None:
            node = self.node(ue.attached)
            if not in_coverage(node, ue.position):
                raise NoLinkError(f"{ue.id} is outside {node.id}")
            self.attachments[node.id].add(ue.id)

    def node(self, node_id: str) -> AccessNode:
        try:
            return self.nodes[node_id]
        except KeyError:
            raise KeyError(f"unknown node {node_id!r}") from None

    @property
    def rats(self) -> dict[str, Rat]:
        return {nid: n.rat for nid, n in self.nodes.items()}

    def detach(self, ue: Ue) -> None:
        if ue.attached is not None:
            self.attachments[ue.attached].discard(ue.id)
            ue.attached = None

    def attach(self, ue: Ue, node_id: str) -> None:
        if ue.attached is not None:
            raise RuntimeError(f"{ue.id} still attached to {ue.attached}")
        self.attachments[self.node(node_id).id].add(ue.id)
        ue.attached = node_id

    def load_of_rat(self, rat: Rat) -> int:
        return sum(len(s) for nid, s in self.attachments.items() if self.nodes[nid].rat is rat)

    def detached_count(self) -> int:
        return sum(1 for ue in self.ues.values() if ue.attached is None)

    def check_invariants(self) -> None:
        seen: dict[str, str] = {}
        for nid, members in self.attachments.items():
            for uid in members:
                if uid in seen:
                    raise AssertionError(f"{uid} attached to {seen[uid]} and {nid}")
                seen[uid] = nid
                if self.ues[uid].attached != nid:
                    raise AssertionError(f"{uid} bookkeeping mismatch")
        for uid, ue in self.ues.items():
            if ue.attached is not None and seen.get(uid) != ue.attached:
                raise AssertionError(f"{uid} missing from {ue.attached}'s set")
        if sum(len(s) for s in self.attachments.values()) + self.detached_count() != len(self.ues):
            raise AssertionError("attachment conservation violated")


def place_ues(count: int, cfg: MobilityConfig, rng: np.random.Generator) -> list[Ue]:
    ues = []
    for i in range(count):
        pos = (float(rng.uniform(0, cfg.width)), float(rng.uniform(0, cfg.height)))
        ues.append(
            Ue(
                id=f"sta{i + 1}",
                position=pos,
                speed=float(rng.uniform(cfg.speed_min, cfg.speed_max)),
                heading=float(rng.uniform(0, 2 * math.pi)),
                stream=i,
            )
        )
    return ues


def _inward_heading(pos: Position, cfg: MobilityConfig, rng: np.random.Generator) -> float:
    eps = 1e-9
    at_left, at_right = pos[0] <= eps, pos[0] >= cfg.width - eps
    at_bottom, at_top = pos[1] <= eps, pos[1] >= cfg.height - eps
    while True:
        h = float(rng.uniform(0, 2 * math.pi))
        dx, dy = math.cos(h), math.sin(h)
        if (at_left and dx <= 0) or (at_right and dx >= 0) or (at_bottom and dy <= 0) or (at_top and dy >= 0):
            continue
        return h


def step_mobility(ue: Ue, cfg: MobilityConfig, rng: np.random.Generator) -> Ue:
    """Random-direction step: straight motion until the area boundary.

    A UE that reaches the boundary is clamped onto it and draws a fresh
    heading pointing into the area and a fresh speed.
    """
    x = ue.position[0] + ue.speed * cfg.dt * math.cos(ue.heading)
    y = ue.position[1] + ue.speed * cfg.dt * math.sin(ue.heading)
    cx = min(max(x, 0.0), cfg.width)
    cy = min(max(y, 0.0), cfg.height)
    touching = cx in (0.0, cfg.width) or cy in (0.0, cfg.height)
    if not touching:
        return replace(ue, position=(x, y))
    pos = (cx, cy)
    return replace(
        ue,
        position=pos,
        heading=_inward_heading(pos, cfg, rng),
        speed=float(rng.uniform(cfg.speed_min, cfg.speed_max)),
    )


def node_load(state: World, node_id: str) -> int:
    try:
        return len(state.attachments[node_id])
    except KeyError:
        raise KeyError(f"unknown node {node_id!r}") from None


def node_delay(state: World, node: AccessNode, rng: np.random.Generator | None, extra: int = 0) -> float:
    cfg = state.link
    d = cfg.base_delay(node.rat) + cfg.delay_per_station * (node_load(state, node.id) + extra)
    if cfg.jitter > 0 and rng is not None:
        d += float(rng.uniform(-cfg.jitter, cfg.jitter))
    return max(d, MIN_DELAY)


def link_delay(
    state: World, ue: Ue, node: AccessNode, rng: np.random.Generator | None, extra: int = 0
) -> float:
    """Round-trip delay of the UE-node link: RAT base + per-station term + jitter."""
    if not in_coverage(node, ue.position):
        raise NoLinkError(f"{ue.id} has no link to {node.id}")
    return node_delay(state, node, rng, extra)


def link_throughput(state: World, ue: Ue, node: AccessNode | None = None) -> float:
    """Equal share of the node's rate cap; 0 when detached or out of range."""
    if node is None:
        if ue.attached is None:
            return 0.0
        node = state.node(ue.attached)
    if ue.attached != node.id or not in_coverage(node, ue.position):
        return 0.0
    return state.link.rate_cap / max(1, node_load(state, node.id))


def cross_rat_of(old: AccessNode | None, new: AccessNode | None) -> CrossRat:
    if old is None or new is None or old.id == new.id:
        return CrossRat.NONE
    if old.rat is Rat.WIFI and new.rat is Rat.FIVE_G:
        return CrossRat.WIFI_TO_5G
    if old.rat is Rat.FIVE_G and new.rat is Rat.WIFI:
        return CrossRat.FIVEG_TO_WIFI
    return CrossRat.INTRA


def execute_handover(
    state: World,
    ue: Ue,
    target: str,
    rng: np.random.Generator | None = None,
    guard_applied: bool = False,
) -> HandoverEvent:
    """Hard (break-before-make) transfer of ``ue`` to ``target``.

    Mutates ``state`` and returns the event record. An out-of-range target
    leaves the UE detached and yields a failed event with zero throughput.
    """
    new = state.node(target)
    old = state.node(ue.attached) if ue.attached is not None else None
    epoch = state.clock

    if old is not None and old.id == new.id:
        d = node_delay(state, old, rng)
        return HandoverEvent(
            epoch, ue.id, old.id, old.id, CrossRat.NONE, d, d,
            link_throughput(state, ue, old), guard_applied=guard_applied,
        )

    delay_before = node_delay(state, old, rng) if old is not None else None
    state.detach(ue)
    kind = cross_rat_of(old, new)
    if not in_coverage(new, ue.position):
        log.info("handover of %s to %s failed: out of coverage", ue.id, new.id)
        return HandoverEvent(
            epoch, ue.id, old.id if old else None, new.id, kind, delay_before, None, 0.0,
            failed=True, guard_applied=guard_applied,
        )
    state.attach(ue, new.id)
    return HandoverEvent(
        epoch, ue.id, old.id if old else None, new.id, kind, delay_before,
        node_delay(state, new, rng), link_throughput(state, ue, new), guard_applied=guard_applied,
    )


def enumerate_candidates(state: World, ue: Ue) -> list[str]:
    """Nodes whose coverage disc contains the UE, in ascending id order."""
    return sorted(nid for nid, n in state.nodes.items() if in_coverage(n, ue.position))


def collect_decision_inputs(
    state: World,
    ue: Ue,
    rng: np.random.Generator | None = None,
    epoch: int = 0,
    ue_key: int | None = None,
    prospective: bool = False,
) -> DecisionMatrix:
    """RSSI (dBm), load (stations) and delay (s) for every in-range node.

    By default load and delay are the nodes' current values. With
    ``prospective`` every candidate other than the UE's current node is
    charged one extra station, so all rows describe the node as it would be
    with this UE attached.
    """
    cands = enumerate_candidates(state, ue)
    if not cands:
        raise NoCandidateError(f"{ue.id} at {ue.position} is outside every node")
    key = ue.stream if ue_key is None else ue_key
    rows = []
    for nid in cands:
        node = state.nodes[nid]
        extra = 1 if prospective and nid != ue.attached else 0
        rows.append(
            (
                rssi_dbm(node, ue.position, state.propagation, epoch, key),
                float(node_load(state, nid) + extra),
                link_delay(state, ue, node, rng, extra),
            )
        )
    return DecisionMatrix(tuple(cands), HANDOVER_CRITERIA, np.array(rows))


"""Radio geometry: access nodes, log-distance path loss, RSSI and coverage."""

from __future__ import annotations

import math
import zlib
from dataclasses import dataclass
from enum import Enum

import numpy as np

SPEED_OF_LIGHT = 299_792_458.0

Position = tuple[float, float]


class Rat(str, Enum):
    FIVE_G = "5G"
    WIFI = "WiFi"


# Per-RAT defaults: (tx power dBm, carrier Hz, range m)
RAT_DEFAULTS = {
    Rat.FIVE_G: (16.0, 2.412e9, 150.0),
    Rat.WIFI: (2.0, 5.18e9, 60.0),
}
DEFAULT_CAPACITY_MBPS = 78.0


@dataclass(frozen=True)
class AccessNode:
    id: str
    rat: Rat
    position: Position
    tx_power: float
    frequency: float
    range: float
    capacity: float = DEFAULT_CAPACITY_MBPS

    def __post_init__(self):
        object.__setattr__(self, "rat", Rat(self.rat))
        object.__setattr__(self, "position", (float(self.position[0]), float(self.position[1])))
        if self.range <= 0:
            raise ValueError(f"{self.id}: range must be positive")
        if self.capacity <= 0:
            raise ValueError(f"{self.id}: capacity must be positive")
        if self.frequency <= 0:
            raise ValueError(f"{self.id}: frequency must be positive")

    @classmethod
    def of_rat(cls, id: str, rat: Rat | str, position: Position, **overrides) -> "AccessNode":
        rat = Rat(rat)
        tx, freq, rng = RAT_DEFAULTS[rat]
        kw = dict(tx_power=tx, frequency=freq, range=rng)
        kw.update(overrides)
        return cls(id=id, rat=rat, position=position, **kw)

    @classmethod
    def gnb(cls, id: str, position: Position, **overrides) -> "AccessNode":
        return cls.of_rat(id, Rat.FIVE_G, position, **overrides)

    @classmethod
    def wifi_ap(cls, id: str, position: Position, **overrides) -> "AccessNode":
        return cls.of_rat(id, Rat.WIFI, position, **overrides)


@dataclass(frozen=True)
class PropagationConfig:
    exponent: float = 3.5
    reference_distance: float = 1.0
    shadowing_sigma: float = 0.0
    rng_seed: int = 0

    def __post_init__(self):
        if self.exponent <= 0:
            raise ValueError("path loss exponent must be positive")
        if self.reference_distance <= 0:
            raise ValueError("reference distance must be positive")
        if self.shadowing_sigma < 0:
            raise ValueError("shadowing sigma must be non-negative")


def distance(a: Position, b: Position) -> float:
    return math.hypot(a[0] - b[0], a[1] - b[1])


def free_space_loss_db(d: float, frequency: float) -> float:
    return 20 * math.log10(d) + 20 * math.log10(frequency) + 20 * math.log10(4 * math.pi / SPEED_OF_LIGHT)


def path_loss_db(
    d: float,
    frequency: float,
    cfg: PropagationConfig = PropagationConfig(),
    rng: np.random.Generator | None = None,
) -> float:
    """Log-distance path loss anchored to free space at the reference distance.

    Distances below the reference distance are clamped to it. With a positive
    ``shadowing_sigma`` a zero-mean Gaussian term is drawn from ``rng``
    (or a generator seeded from ``cfg.rng_seed`` when none is given).
    """
    if not d > 0 or not math.isfinite(d):
        raise ValueError(f"distance must be positive, got {d}")
    if not frequency > 0:
        raise ValueError(f"frequency must be positive, got {frequency}")
    d0 = cfg.reference_distance
    d = max(d, d0)
    loss = free_space_loss_db(d0, frequency) + 10 * cfg.exponent * math.log10(d / d0)
    if cfg.shadowing_sigma > 0:
        gen = rng if rng is not None else np.random.default_rng(cfg.rng_seed)
        loss += float(gen.normal(0.0, cfg.shadowing_sigma))
    return loss


def shadowing_stream(cfg: PropagationConfig, node_id: str, *keys: int) -> np.random.Generator:
    """Generator keyed on (seed, node, keys...) so repeated lookups agree."""
    return np.random.default_rng([cfg.rng_seed, zlib.crc32(node_id.encode()), *keys])


def rssi_dbm(
    node: AccessNode,
    pos: Position,
    cfg: PropagationConfig = PropagationConfig(),
    epoch: int = 0,
    ue_key: int = 0,
) -> float:
    """Received power at ``pos`` from ``node``.

    Shadowing, if enabled, is a deterministic function of
    ``(cfg.rng_seed, node.id, epoch, ue_key)``.
    """
    d = max(distance(node.position, pos), cfg.reference_distance)
    rng = shadowing_stream(cfg, node.id, epoch, ue_key) if cfg.shadowing_sigma > 0 else None
    return node.tx_power - path_loss_db(d, node.frequency, cfg, rng)


def in_coverage(node: AccessNode, pos: Position) -> bool:
    return distance(node.position, pos) <= node.range


def crossover_ratio(a: AccessNode, b: AccessNode, cfg: PropagationConfig = PropagationConfig()) -> float:
    """Distance ratio d_a / d_b at which both nodes deliver equal RSSI (no shadowing)."""
    gap = (a.tx_power - free_space_loss_db(cfg.reference_distance, a.frequency)) - (
        b.tx_power - free_space_loss_db(cfg.reference_distance, b.frequency)
    )
    return 10 ** (gap / (10 * cfg.exponent))

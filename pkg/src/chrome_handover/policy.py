"""Handover decision policies: strongest-RSSI baseline and guarded MCDM ranking.

The guarded policies rank candidates with TOPSIS, then apply a RAT-based
RSSI floor: when the top-ranked node is a 5G cell and the runner-up is a
WiFi AP whose RSSI clears the floor, the handover goes to the AP instead.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Container, Mapping

import numpy as np

from .mcdm import (
    PAIRWISE_LOAD_FIRST,
    PAIRWISE_RSSI_FIRST,
    DecisionMatrix,
    PairwiseMatrix,
    RankingResult,
    WeightVector,
    ahp_weights,
    consistency_ratio,
    rank_candidates,
)
from .radio import Rat
from .simnet import enumerate_candidates

__all__ = [
    "Reason",
    "GuardConfig",
    "HandoverDecision",
    "RssiBaseline",
    "ChromeAhp",
    "ChromeEntropy",
    "decide_rssi",
    "decide_chrome",
    "enumerate_candidates",
    "make_policy",
    "PAIRWISE_PRESETS",
]

CONSISTENCY_LIMIT = 0.1

PAIRWISE_PRESETS = {
    "rssi_first": PAIRWISE_RSSI_FIRST,
    "load_first": PAIRWISE_LOAD_FIRST,
}


class Reason(str, Enum):
    BASELINE = "baseline"
    MCDM_TOP = "mcdm_top"
    GUARD_REDIRECT = "guard_redirect"
    NO_CANDIDATE = "no_candidate"
    STAY = "stay"


@dataclass(frozen=True)
class GuardConfig:
    """RSSI floor a WiFi stand-in must clear to take over from a 5G target.

    The comparison is strict (``rssi > threshold``) unless ``inclusive``.
    """

    rssi_threshold: float = -85.0
    enabled: bool = True
    inclusive: bool = False

    def __post_init__(self):
        if not np.isfinite(self.rssi_threshold):
            raise ValueError("rssi_threshold must be finite")

    def passes(self, rssi: float) -> bool:
        return rssi >= self.rssi_threshold if self.inclusive else rssi > self.rssi_threshold


@dataclass(frozen=True)
class HandoverDecision:
    target: str | None
    reason: Reason
    stand_in: str | None = None
    guard_applied: bool = False
    ranking: RankingResult | None = field(default=None, repr=False)


def decide_rssi(
    d: DecisionMatrix | None,
    current: str | None = None,
    hysteresis_db: float = 0.0,
) -> HandoverDecision:
    """Pick the strongest signal; ties and sub-hysteresis gains keep ``current``."""
    if d is None or d.shape[0] == 0:
        return HandoverDecision(None, Reason.NO_CANDIDATE)
    rssi = d.column("rssi")
    best = max(range(len(rssi)), key=lambda i: (rssi[i], d.candidates[i] == current, _neg_id(d.candidates[i])))
    target = d.candidates[best]
    if current in d.candidates and target != current:
        if rssi[best] - rssi[d.index(current)] <= hysteresis_db:
            target = current
    reason = Reason.STAY if target == current else Reason.BASELINE
    return HandoverDecision(target, reason)


def _neg_id(s: str):
    # max() with this key prefers the lexicographically smaller id
    return tuple(-ord(ch) for ch in s)


def decide_chrome(
    d: DecisionMatrix | None,
    mode: str,
    weights: WeightVector | None = None,
    guard: GuardConfig = GuardConfig(),
    current: str | None = None,
    rats: Mapping[str, Rat] | None = None,
    covered: Container[str] | None = None,
) -> HandoverDecision:
    """Rank with TOPSIS (``mode`` ``"ahp"`` or ``"entropy"``) and apply the guard.

    ``rats`` maps node id to RAT (needed by the guard); ``covered`` lists the
    nodes whose coverage contains the UE and defaults to every candidate.
    """
    if d is None or d.shape[0] == 0:
        return HandoverDecision(None, Reason.NO_CANDIDATE)
    if d.shape[0] == 1:
        target = d.candidates[0]
        return HandoverDecision(target, Reason.STAY if target == current else Reason.MCDM_TOP)

    ranking = rank_candidates(_fill_degenerate(d), mode, weights, current)
    target = ranking.candidates[ranking.order[0]]
    stand_in = ranking.candidates[ranking.order[1]]
    covered = d.candidates if covered is None else covered

    if guard.enabled and rats is not None:
        if (
            rats.get(target) is Rat.FIVE_G
            and rats.get(stand_in) is Rat.WIFI
            and guard.passes(float(d.column("rssi")[d.index(stand_in)]))
            and stand_in in covered
        ):
            return HandoverDecision(stand_in, Reason.GUARD_REDIRECT, stand_in, True, ranking)

    reason = Reason.STAY if target == current else Reason.MCDM_TOP
    return HandoverDecision(target, reason, stand_in, False, ranking)


def _fill_degenerate(d: DecisionMatrix) -> DecisionMatrix:
    # An all-zero column (e.g. every candidate idle) carries no information;
    # any constant column ranks identically, and ones keep normalization defined.
    zero = np.all(d.values == 0, axis=0)
    if not zero.any():
        return d
    vals = d.values.copy()
    vals[:, zero] = 1.0
    return DecisionMatrix(d.candidates, d.criteria, vals)


class RssiBaseline:
    name = "rssi"

    def __init__(self, hysteresis_db: float = 0.0):
        self.hysteresis_db = hysteresis_db

    def decide(self, d, current=None, rats=None, covered=None) -> HandoverDecision:
        return decide_rssi(d, current, self.hysteresis_db)


class ChromeAhp:
    """TOPSIS over precomputed AHP weights, with the RSSI guard."""

    name = "chrome-ahp"

    def __init__(self, pairwise: PairwiseMatrix = PAIRWISE_RSSI_FIRST, guard: GuardConfig = GuardConfig()):
        cr = consistency_ratio(pairwise)
        if cr >= CONSISTENCY_LIMIT:
            raise ValueError(f"pairwise matrix is inconsistent (CR={cr:.3f} >= {CONSISTENCY_LIMIT})")
        self.pairwise = pairwise
        self.consistency = cr
        self.weights = ahp_weights(pairwise)
        self.guard = guard

    def decide(self, d, current=None, rats=None, covered=None) -> HandoverDecision:
        return decide_chrome(d, "ahp", self.weights, self.guard, current, rats, covered)


class ChromeEntropy:
    """TOPSIS with per-epoch entropy weights, with the RSSI guard."""

    name = "chrome-entropy"

    def __init__(self, guard: GuardConfig = GuardConfig()):
        self.guard = guard

    def decide(self, d, current=None, rats=None, covered=None) -> HandoverDecision:
        return decide_chrome(d, "entropy", None, self.guard, current, rats, covered)


def make_policy(
    name: str,
    guard: GuardConfig = GuardConfig(),
    pairwise: PairwiseMatrix = PAIRWISE_RSSI_FIRST,
    hysteresis_db: float = 0.0,
):
    if name == "rssi":
        return RssiBaseline(hysteresis_db)
    if name == "chrome-ahp":
        return ChromeAhp(pairwise, guard)
    if name == "chrome-entropy":
        return ChromeEntropy(guard)
    raise ValueError(f"unknown policy {name!r}; expected rssi, chrome-ahp or chrome-entropy")

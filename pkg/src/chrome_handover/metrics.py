"""Handover event records, per-run aggregation and cross-policy comparison."""

from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import asdict, dataclass, field, fields
from enum import Enum
from pathlib import Path
from typing import Iterable, Sequence

log = logging.getLogger(__name__)


class CrossRat(str, Enum):
    NONE = "none"
    WIFI_TO_5G = "wifi_to_5g"
    FIVEG_TO_WIFI = "fiveg_to_wifi"
    INTRA = "intra"


@dataclass(frozen=True)
class HandoverEvent:
    """One UE decision epoch.

    ``from_node == to_node`` marks a no-op (the UE stayed put). A UE that was
    detached has ``from_node`` empty; ``to_node`` is empty when no candidate
    was available.
    """

    epoch: float
    ue_id: str
    from_node: str | None
    to_node: str | None
    cross_rat: CrossRat
    delay_before: float | None
    delay_after: float | None
    throughput_sample: float
    failed: bool = False
    guard_applied: bool = False

    def __post_init__(self):
        object.__setattr__(self, "cross_rat", CrossRat(self.cross_rat))
        if self.failed and self.throughput_sample != 0:
            raise ValueError("a failed handover must carry a zero throughput sample")

    @property
    def is_handover(self) -> bool:
        """True for an attempted transfer between two distinct nodes."""
        return self.from_node is not None and self.to_node is not None and self.from_node != self.to_node


CSV_COLUMNS = [f.name for f in fields(HandoverEvent)]


def delay_cost(event: HandoverEvent) -> float:
    """New-link delay minus old-link delay; negative means the handover helped."""
    if event.failed:
        raise ValueError("delay cost is undefined for a failed handover")
    if event.delay_before is None or event.delay_after is None:
        raise ValueError("delay cost needs both delay samples")
    return event.delay_after - event.delay_before


@dataclass
class RunSummary:
    avg_5g_load: float = 0.0
    total_handovers: int = 0
    wifi_to_5g_handovers: int = 0
    mean_delay_cost: float = 0.0
    cumulative_throughput: float = 0.0
    failed_handovers: int = 0
    empty: bool = False
    per_seed: list[dict] = field(default_factory=list)

    HEADLINE = (
        "avg_5g_load",
        "total_handovers",
        "wifi_to_5g_handovers",
        "mean_delay_cost",
        "cumulative_throughput",
    )

    def headline(self) -> dict:
        return {k: getattr(self, k) for k in self.HEADLINE}

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "RunSummary":
        known = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in data.items() if k in known})


def aggregate_run(
    events: Sequence[HandoverEvent],
    load_samples: Sequence[float],
    dt: float = 1.0,
    seed: int | None = None,
) -> RunSummary:
    """Fold one replica's event log into a summary.

    ``load_samples`` are 5G node loads taken at every handover attempt.
    Throughput samples are integrated with step ``dt`` (Mbps * s = Mbit).
    """
    if not events:
        summary = RunSummary(empty=True)
        if seed is not None:
            summary.per_seed = [{"seed": seed, **summary.headline()}]
        return summary

    total = wifi_to_5g = failed = 0
    costs: list[float] = []
    throughput = 0.0
    for ev in events:
        throughput += ev.throughput_sample * dt
        if not ev.is_handover:
            continue
        total += 1
        if ev.cross_rat is CrossRat.WIFI_TO_5G:
            wifi_to_5g += 1
        if ev.failed:
            failed += 1
            continue
        try:
            costs.append(delay_cost(ev))
        except ValueError:
            log.debug("no delay cost for %s at %s", ev.ue_id, ev.epoch)

    summary = RunSummary(
        avg_5g_load=math.fsum(load_samples) / len(load_samples) if load_samples else 0.0,
        total_handovers=total,
        wifi_to_5g_handovers=wifi_to_5g,
        mean_delay_cost=math.fsum(costs) / len(costs) if costs else 0.0,
        cumulative_throughput=throughput,
        failed_handovers=failed,
    )
    if seed is not None:
        summary.per_seed = [{"seed": seed, **summary.headline()}]
    return summary


def merge_runs(runs: Sequence[RunSummary]) -> RunSummary:
    """Average per-seed summaries (ordered as given) into one summary."""
    runs = [r for r in runs]
    if not runs:
        return RunSummary(empty=True)
    n = len(runs)

    def mean(attr):
        return math.fsum(getattr(r, attr) for r in runs) / n

    per_seed = [row for r in runs for row in r.per_seed]
    return RunSummary(
        avg_5g_load=mean("avg_5g_load"),
        total_handovers=mean("total_handovers"),
        wifi_to_5g_handovers=mean("wifi_to_5g_handovers"),
        mean_delay_cost=mean("mean_delay_cost"),
        cumulative_throughput=mean("cumulative_throughput"),
        failed_handovers=mean("failed_handovers"),
        empty=all(r.empty for r in runs),
        per_seed=per_seed,
    )


def spread(summary: RunSummary) -> dict:
    """Per-metric min/mean/max across the per-seed rows."""
    out = {}
    for k in RunSummary.HEADLINE:
        vals = [row[k] for row in summary.per_seed]
        if vals:
            out[k] = {"min": min(vals), "mean": math.fsum(vals) / len(vals), "max": max(vals)}
    return out


def compare_policies(baseline: RunSummary, candidate: RunSummary) -> dict:
    """Percent change of every headline metric relative to the baseline.

    ``percent_change = (candidate - baseline) / baseline * 100``. For load,
    handover counts and delay cost a negative value is an improvement; for
    throughput a positive one is. With a positive baseline delay cost, a
    candidate that turns it negative shows up as a change below -100 %.
    A zero baseline yields ``percent_change = None``; use ``absolute_change``.
    """
    out = {}
    for k in RunSummary.HEADLINE:
        b, c = float(getattr(baseline, k)), float(getattr(candidate, k))
        pct = None if b == 0 else (c - b) / b * 100.0
        out[k] = {"baseline": b, "candidate": c, "absolute_change": c - b, "percent_change": pct}
    return out


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, Enum):
        return v.value
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_events_csv(events: Iterable[HandoverEvent], path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for ev in events:
            w.writerow([_fmt(getattr(ev, c)) for c in CSV_COLUMNS])


def read_events_csv(path: str | Path) -> list[HandoverEvent]:
    def opt_float(s):
        return float(s) if s != "" else None

    out = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != CSV_COLUMNS:
            raise ValueError(f"unexpected event columns {reader.fieldnames}")
        for row in reader:
            out.append(
                HandoverEvent(
                    epoch=float(row["epoch"]),
                    ue_id=row["ue_id"],
                    from_node=row["from_node"] or None,
                    to_node=row["to_node"] or None,
                    cross_rat=CrossRat(row["cross_rat"]),
                    delay_before=opt_float(row["delay_before"]),
                    delay_after=opt_float(row["delay_after"]),
                    throughput_sample=float(row["throughput_sample"]),
                    failed=row["failed"] == "1",
                    guard_applied=row["guard_applied"] == "1",
                )
            )
    return out


def dump_json(data: dict, path: str | Path) -> None:
    Path(path).write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")

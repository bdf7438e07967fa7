"""Replica runner.

Each seed gets independent random streams for UE placement, per-UE mobility,
decision-time delay jitter and event-time delay samples, spawned from one
``SeedSequence``. Because the streams do not depend on the policy, every
policy sees the same UE trajectories for a given seed.
"""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from ..metrics import CrossRat, HandoverEvent, RunSummary, aggregate_run, merge_runs
from ..policy import make_policy
from ..radio import Rat
from ..simnet import (
    World,
    collect_decision_inputs,
    enumerate_candidates,
    execute_handover,
    node_delay,
    place_ues,
    step_mobility,
)
from .scenario import Scenario

log = logging.getLogger(__name__)

POLICIES = ("rssi", "chrome-ahp", "chrome-entropy")


@dataclass
class ReplicaResult:
    seed: int
    policy: str
    events: list[HandoverEvent]
    load_samples: list[float]
    summary: RunSummary
    no_candidate: int = 0
    guard_redirects: int = 0
    reasons: dict[str, int] = field(default_factory=dict)
    epoch_loads: list[int] = field(default_factory=list)

    def diagnostics(self) -> dict:
        return {
            "seed": self.seed,
            "no_candidate": self.no_candidate,
            "guard_redirects": self.guard_redirects,
            "reasons": dict(sorted(self.reasons.items())),
        }


def build_policy(scenario: Scenario, name: str):
    p = scenario.policy
    return make_policy(name, p.guard, p.pairwise(), p.rssi_hysteresis_db)


def run_replica(scenario: Scenario, policy: str, seed: int, check_every: int = 1) -> ReplicaResult:
    """Simulate one seed under one policy and return its event log and summary."""
    decider = build_policy(scenario, policy)
    placement, mobility, decision, event = np.random.SeedSequence(seed).spawn(4)
    mob = scenario.mobility
    ues = place_ues(scenario.ue_count, mob, np.random.default_rng(placement))
    mob_rngs = [np.random.default_rng(s) for s in mobility.spawn(len(ues))]
    decision_rng = np.random.default_rng(decision)
    event_rng = np.random.default_rng(event)

    world = World(
        list(scenario.nodes),
        ues,
        replace(scenario.propagation, rng_seed=seed),
        scenario.link,
    )
    rats = world.rats
    prospective = scenario.policy.load_view == "prospective"
    five_g = [nid for nid, r in rats.items() if r is Rat.FIVE_G]

    events: list[HandoverEvent] = []
    loads: list[float] = []
    reasons: dict[str, int] = {}
    epoch_loads: list[int] = []
    no_candidate = 0

    for k in range(scenario.epochs):
        world.clock = k * scenario.epoch
        if k > 0:
            for uid, ue in list(world.ues.items()):
                world.ues[uid] = step_mobility(ue, mob, mob_rngs[ue.stream])
        for uid in list(world.ues):
            ue = world.ues[uid]
            if not enumerate_candidates(world, ue):
                no_candidate += 1
                log.debug("%s has no candidate at t=%s", uid, world.clock)
                before = node_delay(world, world.node(ue.attached), event_rng) if ue.attached else None
                events.append(
                    HandoverEvent(world.clock, uid, ue.attached, None, CrossRat.NONE, before, None, 0.0)
                )
                world.detach(ue)
                loads.append(float(sum(len(world.attachments[n]) for n in five_g)))
                continue
            d = collect_decision_inputs(world, ue, decision_rng, k, prospective=prospective)
            dec = decider.decide(d, ue.attached, rats, d.candidates)
            reasons[dec.reason.value] = reasons.get(dec.reason.value, 0) + 1
            events.append(execute_handover(world, ue, dec.target, event_rng, dec.guard_applied))
            loads.append(float(sum(len(world.attachments[n]) for n in five_g)))
        epoch_loads.append(sum(len(world.attachments[n]) for n in five_g))
        if check_every and k % check_every == 0:
            world.check_invariants()

    summary = aggregate_run(events, loads, scenario.epoch, seed)
    return ReplicaResult(
        seed=seed,
        policy=policy,
        events=events,
        load_samples=loads,
        summary=summary,
        no_candidate=no_candidate,
        guard_redirects=reasons.get("guard_redirect", 0),
        reasons=reasons,
        epoch_loads=epoch_loads,
    )


def _replica_job(args):
    scenario, policy, seed, check_every = args
    return run_replica(scenario, policy, seed, check_every)


def run_experiment(
    scenario: Scenario,
    policy: str,
    seeds=None,
    workers: int = 1,
    check_every: int = 1,
) -> tuple[RunSummary, list[ReplicaResult]]:
    """Run every seed and merge the summaries; results come back in seed order."""
    seeds = list(scenario.seeds if seeds is None else seeds)
    jobs = [(scenario, policy, s, check_every) for s in seeds]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_replica_job, jobs))
    else:
        results = [_replica_job(j) for j in jobs]
    return merge_runs([r.summary for r in results]), results

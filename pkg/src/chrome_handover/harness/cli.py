"""``chrome-ho``: run scenarios, compare policies and check the worked tables.

Subcommands::

    chrome-ho run --scenario desk_64sta --policy chrome-ahp --out results/
    chrome-ho sweep --scenario desk_64sta --policies all --out results/
    chrome-ho compare --baseline results/summary_rssi.json --candidate results/summary_chrome-ahp.json
    chrome-ho verify-tables

Outputs depend only on the scenario, policy and seeds, so repeated
invocations write byte-identical files.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

from ..metrics import RunSummary, compare_policies, dump_json, spread, write_events_csv
from .golden import TOLERANCE, all_passed, verify_tables
from .runner import POLICIES, run_experiment
from .scenario import Scenario, ScenarioError, load_scenario

BASELINE = "rssi"


def _write_run(scenario: Scenario, policy: str, out: Path, workers: int, seeds=None) -> RunSummary:
    summary, results = run_experiment(scenario, policy, seeds=seeds, workers=workers)
    out.mkdir(parents=True, exist_ok=True)
    for r in results:
        write_events_csv(r.events, out / f"events_{policy}_{r.seed}.csv")
        with open(out / f"load_series_{policy}_{r.seed}.csv", "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["time", "load_5g"])
            for k, load in enumerate(r.epoch_loads):
                w.writerow([repr(k * scenario.epoch), load])
    doc = {
        "policy": policy,
        "scenario": scenario.name,
        "scenario_hash": scenario.digest(),
        "seeds": [r.seed for r in results],
        "summary": summary.to_dict(),
        "spread": spread(summary),
        "diagnostics": [r.diagnostics() for r in results],
    }
    dump_json(doc, out / f"summary_{policy}.json")
    return summary


def _read_summary(path: str) -> tuple[dict, RunSummary]:
    doc = json.loads(Path(path).read_text())
    return doc, RunSummary.from_dict(doc["summary"])


def _comparison_doc(base_doc: dict, cand_doc: dict, base: RunSummary, cand: RunSummary) -> dict:
    return {
        "baseline": base_doc.get("policy"),
        "candidate": cand_doc.get("policy"),
        "scenario_hash": cand_doc.get("scenario_hash"),
        "seeds": cand_doc.get("seeds"),
        "metrics": compare_policies(base, cand),
    }


def _print_comparison(doc: dict) -> None:
    print(f"{doc['candidate']} vs {doc['baseline']}")
    for k, row in doc["metrics"].items():
        pct = "n/a" if row["percent_change"] is None else f"{row['percent_change']:+.1f}%"
        print(f"  {k:24s} {row['baseline']:>14.6g} -> {row['candidate']:>14.6g}  {pct}")


def cmd_run(args) -> int:
    scenario = load_scenario(args.scenario)
    summary = _write_run(scenario, args.policy, Path(args.out), args.workers, args.seeds)
    for k, v in summary.headline().items():
        print(f"{k:24s} {v:.6g}")
    return 0


def cmd_sweep(args) -> int:
    scenario = load_scenario(args.scenario)
    policies = list(POLICIES) if args.policies == ["all"] else args.policies
    for p in policies:
        if p not in POLICIES:
            raise SystemExit(f"unknown policy {p!r}; choose from {', '.join(POLICIES)}")
    out = Path(args.out)
    summaries = {p: _write_run(scenario, p, out, args.workers, args.seeds) for p in policies}
    if BASELINE in summaries:
        base_doc = json.loads((out / f"summary_{BASELINE}.json").read_text())
        comparison = {}
        for p in policies:
            if p == BASELINE:
                continue
            cand_doc = json.loads((out / f"summary_{p}.json").read_text())
            comparison[p] = _comparison_doc(base_doc, cand_doc, summaries[BASELINE], summaries[p])
            _print_comparison(comparison[p])
        dump_json(comparison, out / "comparison.json")
    return 0


def cmd_compare(args) -> int:
    base_doc, base = _read_summary(args.baseline)
    cand_doc, cand = _read_summary(args.candidate)
    if base_doc.get("scenario_hash") != cand_doc.get("scenario_hash"):
        logging.warning("summaries come from different scenarios")
    doc = _comparison_doc(base_doc, cand_doc, base, cand)
    _print_comparison(doc)
    out = Path(args.out) if args.out else Path(args.candidate).parent / "comparison.json"
    dump_json(doc, out)
    return 0


def cmd_verify(args) -> int:
    checks = verify_tables(args.tol)
    for c in checks:
        if c.informational and not args.verbose:
            continue
        print(c.line())
    failed = [c for c in checks if not c.informational and not c.passed]
    print(f"{len(checks) - len(failed)} of {len(checks)} checks passed" if failed else "all tables match")
    if failed and not args.verbose:
        print("rerun with --verbose to include the diagnostic probes")
    return 0 if all_passed(checks) else 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="chrome-ho", description=__doc__.split("\n")[0])
    ap.add_argument("--log-level", default="WARNING", help="logging level (default WARNING)")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--scenario", required=True, help="scenario YAML path or preset name")
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--workers", type=int, default=1, help="parallel replicas (default 1)")
        p.add_argument("--seeds", type=int, nargs="+", help="override the scenario's seed list")

    p = sub.add_parser("run", help="simulate one policy")
    common(p)
    p.add_argument("--policy", required=True, choices=POLICIES)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="simulate several policies and compare them with the baseline")
    common(p)
    p.add_argument("--policies", nargs="+", default=["all"], help="policy names or 'all'")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("compare", help="compare two summary files")
    p.add_argument("--baseline", required=True)
    p.add_argument("--candidate", required=True)
    p.add_argument("--out", help="comparison JSON path (default: next to the candidate)")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("verify-tables", help="recompute the worked tables and diff them")
    p.add_argument("--tol", type=float, default=TOLERANCE)
    p.add_argument("--verbose", action="store_true", help="also print diagnostic probes")
    p.set_defaults(func=cmd_verify)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=args.log_level.upper(), format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ScenarioError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

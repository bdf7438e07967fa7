"""Recompute the worked decision tables and diff them against shipped fixtures.

Each fixture holds a raw decision matrix and the published tables derived
from it. ``verify_tables`` reruns the ranking pipeline, compares every table
at an absolute tolerance, and reports one ``TableCheck`` per table. Probes
(alternative inputs that explain a mismatch) are evaluated too but never
affect the pass/fail outcome.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources

import numpy as np

from ..mcdm import (
    HANDOVER_CRITERIA,
    DecisionMatrix,
    PairwiseMatrix,
    ahp_weights,
    apply_weights,
    consistency_ratio,
    entropy_weights,
    linear_normalize,
    rank_candidates,
    to_linear_power,
    vector_normalize,
)
from ..policy import PAIRWISE_PRESETS

TOLERANCE = 1e-3
CR_TOLERANCE = 5e-3


@dataclass(frozen=True)
class TableCheck:
    fixture: str
    table: str
    expected: object
    actual: object
    max_error: float | None
    passed: bool
    note: str = ""
    informational: bool = False

    def line(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        tag = f"INFO:{'match' if self.passed else 'mismatch'}" if self.informational else verdict
        err = "" if self.max_error is None else f" max|err|={self.max_error:.2e}"
        note = f"  ({self.note})" if self.note else ""
        return f"[{tag}] {self.fixture}:{self.table}{err}{note}"


def load_fixture(name: str) -> dict:
    res = resources.files("chrome_handover.harness") / "golden" / f"{name}.json"
    return json.loads(res.read_text())


def _matrix(fx: dict, raw=None) -> DecisionMatrix:
    return DecisionMatrix(tuple(fx["candidates"]), HANDOVER_CRITERIA, np.asarray(raw or fx["raw"], dtype=float))


def compute_tables(d: DecisionMatrix, pairwise: PairwiseMatrix, load_first: PairwiseMatrix | None = None) -> dict:
    """Every intermediate table of both pipelines for one decision matrix."""
    lin = to_linear_power(d)
    out: dict[str, object] = {}

    r = linear_normalize(lin)
    ent = entropy_weights(r)
    er = rank_candidates(d, "entropy")
    out.update(
        {
            "entropy.normalized": r.values,
            "entropy.entropy": ent.entropy,
            "entropy.divergence": ent.divergence,
            "entropy.weights": ent.weights.weights,
            "entropy.weighted": apply_weights(r, ent.weights),
            "entropy.ideal": er.ideal,
            "entropy.negative_ideal": er.negative_ideal,
            "entropy.s_plus": er.s_plus,
            "entropy.s_minus": er.s_minus,
            "entropy.closeness": er.closeness,
            "entropy.ranking": list(er.ranked),
        }
    )

    w = ahp_weights(pairwise)
    ar = rank_candidates(d, "ahp", w)
    out.update(
        {
            "ahp.weights": w.weights,
            "ahp.weighted": apply_weights(vector_normalize(lin), w),
            "ahp.ideal": ar.ideal,
            "ahp.negative_ideal": ar.negative_ideal,
            "ahp.s_plus": ar.s_plus,
            "ahp.s_minus": ar.s_minus,
            "ahp.closeness": ar.closeness,
            "ahp.ranking": list(ar.ranked),
        }
    )
    if load_first is not None:
        wl = ahp_weights(load_first)
        lr = rank_candidates(d, "ahp", wl)
        out.update(
            {
                "ahp_load_first.weights": wl.weights,
                "ahp_load_first.closeness": lr.closeness,
                "ahp_load_first.ranking": list(lr.ranked),
            }
        )
    return out


def _compare(fixture: str, table: str, expected, actual, tol: float, note: str = "", info: bool = False) -> TableCheck:
    if isinstance(expected, list) and expected and isinstance(expected[0], str):
        ok = list(actual) == list(expected)
        return TableCheck(fixture, table, expected, list(actual), None, ok, note, info)
    exp = np.asarray(expected, dtype=float)
    act = np.asarray(actual, dtype=float)
    if exp.shape != act.shape:
        return TableCheck(fixture, table, expected, act.tolist(), None, False, f"shape {act.shape} != {exp.shape}", info)
    err = float(np.max(np.abs(exp - act)))
    return TableCheck(fixture, table, expected, act.tolist(), err, err <= tol, note, info)


def _swap_cost_columns(ideal, negative):
    # benefit column (rssi) stays; cost columns (load, delay) are exchanged
    a, b = list(ideal), list(negative)
    for j in (1, 2):
        a[j], b[j] = b[j], a[j]
    return a, b


def check_use_case(name: str, tol: float = TOLERANCE) -> list[TableCheck]:
    fx = load_fixture(name)
    pairwise = PAIRWISE_PRESETS[fx.get("pairwise", "rssi_first")]
    expected = fx["tables"]
    errata = fx.get("errata", {})
    actual = compute_tables(_matrix(fx), pairwise, PAIRWISE_PRESETS["load_first"])

    checks = []
    for table, exp in expected.items():
        if table in errata and table.endswith(".ideal"):
            stem = table.rsplit(".", 1)[0]
            exp_ideal, _ = _swap_cost_columns(exp, expected[f"{stem}.negative_ideal"])
            checks.append(_compare(name, table, exp_ideal, actual[table], tol, "erratum: cost columns exchanged"))
            continue
        if table.endswith(".negative_ideal") and f"{table.rsplit('.', 1)[0]}.ideal" in errata:
            stem = table.rsplit(".", 1)[0]
            _, exp_neg = _swap_cost_columns(expected[f"{stem}.ideal"], exp)
            checks.append(_compare(name, table, exp_neg, actual[table], tol, "erratum: cost columns exchanged"))
            continue
        checks.append(_compare(name, table, exp, actual[table], tol))

    for probe, spec in fx.get("probes", {}).items():
        alt = compute_tables(_matrix(fx, spec["raw"]), pairwise, PAIRWISE_PRESETS["load_first"])
        for table, exp in expected.items():
            if table.endswith(".weights"):
                continue
            checks.append(_compare(name, f"{table}[probe:{probe}]", exp, alt[table], tol, info=True))
    return checks


def check_pairwise(tol: float = TOLERANCE) -> list[TableCheck]:
    fx = load_fixture("pairwise")
    checks = []
    for key, spec in fx["matrices"].items():
        p = PairwiseMatrix.from_upper(spec["upper"])
        checks.append(_compare("pairwise", f"{key}.weights", spec["weights"], ahp_weights(p).weights, tol))
        if "consistency_ratio" in spec:
            cr = consistency_ratio(p)
            c = _compare("pairwise", f"{key}.consistency_ratio", spec["consistency_ratio"], cr, CR_TOLERANCE)
            checks.append(c if cr < 0.1 else TableCheck(c.fixture, c.table, c.expected, c.actual, c.max_error, False, "CR >= 0.1"))
    return checks


def verify_tables(tol: float = TOLERANCE) -> list[TableCheck]:
    return check_use_case("rssi_use_case", tol) + check_use_case("load_use_case", tol) + check_pairwise(tol)


def all_passed(checks: list[TableCheck]) -> bool:
    return all(c.passed for c in checks if not c.informational)

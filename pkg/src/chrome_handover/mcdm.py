"""Multi-criteria ranking primitives: normalization, AHP and entropy weights, TOPSIS.

Everything here is a pure function of its inputs. Matrices are ``numpy``
arrays with candidates along rows and criteria along columns.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterable, Mapping, Sequence

import numpy as np

__all__ = [
    "Direction",
    "Criterion",
    "RSSI",
    "LOAD",
    "DELAY",
    "HANDOVER_CRITERIA",
    "DecisionMatrix",
    "NormalizedMatrix",
    "WeightVector",
    "PairwiseMatrix",
    "EntropyResult",
    "RankingResult",
    "MCDMError",
    "DegenerateColumnError",
    "SingleCandidateError",
    "InvalidPairwiseError",
    "ConvergenceError",
    "dbm_to_milliwatt",
    "to_linear_power",
    "linear_normalize",
    "vector_normalize",
    "entropy_weights",
    "ahp_weights",
    "consistency_ratio",
    "apply_weights",
    "topsis_score",
    "rank_candidates",
    "PAIRWISE_RSSI_FIRST",
    "PAIRWISE_LOAD_FIRST",
    "RANDOM_INDEX",
]

WEIGHT_SUM_TOL = 1e-9
DEGENERATE_SEPARATION = 1e-12
TIE_TOL = 1e-12


class MCDMError(ValueError):
    """Base class for invalid ranking inputs."""


class DegenerateColumnError(MCDMError):
    def __init__(self, column: int, name: str = ""):
        self.column = column
        self.name = name
        super().__init__(f"column {column} ({name or '?'}) cannot be normalized: zero sum/norm")


class SingleCandidateError(MCDMError):
    pass


class InvalidPairwiseError(MCDMError):
    pass


class ConvergenceError(ArithmeticError):
    pass


class Direction(str, Enum):
    BENEFIT = "benefit"
    COST = "cost"


@dataclass(frozen=True)
class Criterion:
    name: str
    direction: Direction
    unit: str = ""

    def __post_init__(self):
        object.__setattr__(self, "direction", Direction(self.direction))


RSSI = Criterion("rssi", Direction.BENEFIT, "dBm")
LOAD = Criterion("load", Direction.COST, "stations")
DELAY = Criterion("delay", Direction.COST, "s")
HANDOVER_CRITERIA = (RSSI, LOAD, DELAY)


@dataclass(frozen=True)
class DecisionMatrix:
    """Raw measurements, one row per candidate and one column per criterion.

    Columns whose criterion unit is ``"dBm"`` hold logarithmic power and are
    converted to milliwatts by :func:`to_linear_power` before normalization.
    """

    candidates: tuple[str, ...]
    criteria: tuple[Criterion, ...]
    values: np.ndarray

    def __post_init__(self):
        cands = tuple(str(c) for c in self.candidates)
        crits = tuple(self.criteria)
        vals = np.array(self.values, dtype=float, copy=True)
        if vals.ndim != 2:
            raise MCDMError(f"values must be 2-D, got shape {vals.shape}")
        n, m = vals.shape
        if n < 1 or m < 1:
            raise MCDMError("decision matrix needs at least one candidate and one criterion")
        if len(cands) != n or len(crits) != m:
            raise MCDMError(
                f"shape {vals.shape} does not match {len(cands)} candidates x {len(crits)} criteria"
            )
        if len(set(cands)) != n:
            raise MCDMError("candidate identifiers must be unique")
        if not np.all(np.isfinite(vals)):
            raise MCDMError("decision matrix contains non-finite values")
        for j, crit in enumerate(crits):
            if crit.name == "load" and np.any(vals[:, j] < 0):
                raise MCDMError("load column must be non-negative")
            if crit.name == "delay" and np.any(vals[:, j] <= 0):
                raise MCDMError("delay column must be strictly positive")
        vals.setflags(write=False)
        object.__setattr__(self, "candidates", cands)
        object.__setattr__(self, "criteria", crits)
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_rows(
        cls,
        rows: Mapping[str, Sequence[float]],
        criteria: Sequence[Criterion] = HANDOVER_CRITERIA,
    ) -> "DecisionMatrix":
        return cls(tuple(rows), tuple(criteria), np.array(list(rows.values()), dtype=float))

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    def column(self, name: str) -> np.ndarray:
        for j, crit in enumerate(self.criteria):
            if crit.name == name:
                return self.values[:, j]
        raise KeyError(name)

    def index(self, candidate: str) -> int:
        return self.candidates.index(candidate)

    def with_value(self, candidate: str, criterion: str, value: float) -> "DecisionMatrix":
        vals = self.values.copy()
        j = [c.name for c in self.criteria].index(criterion)
        vals[self.index(candidate), j] = value
        return DecisionMatrix(self.candidates, self.criteria, vals)


@dataclass(frozen=True)
class NormalizedMatrix:
    values: np.ndarray
    scheme: str  # "linear" | "vector"


@dataclass(frozen=True)
class WeightVector:
    weights: np.ndarray
    provenance: str  # "ahp" | "entropy" | "uniform_fallback" | "explicit"

    def __post_init__(self):
        w = np.array(self.weights, dtype=float, copy=True)
        if w.ndim != 1 or w.size == 0:
            raise MCDMError("weights must be a non-empty vector")
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise MCDMError("weights must be finite and non-negative")
        if abs(w.sum() - 1.0) > WEIGHT_SUM_TOL:
            raise MCDMError(f"weights sum to {w.sum()!r}, expected 1")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @classmethod
    def explicit(cls, weights: Iterable[float], renormalize: bool = False) -> "WeightVector":
        w = np.asarray(list(weights), dtype=float)
        if renormalize:
            w = w / w.sum()
        return cls(w, "explicit")

    @classmethod
    def uniform(cls, m: int) -> "WeightVector":
        return cls(np.full(m, 1.0 / m), "uniform_fallback")

    def __len__(self) -> int:
        return self.weights.size


@dataclass(frozen=True)
class PairwiseMatrix:
    """Reciprocal pairwise comparison matrix for AHP.

    ``rtol`` is the relative tolerance on ``p[i, j] * p[j, i] == 1``; tables
    printed with two decimals (``0.33`` for 1/3) fail the default check, so
    build those through :meth:`from_upper`.
    """

    values: np.ndarray
    rtol: float = 1e-6

    def __post_init__(self):
        p = np.array(self.values, dtype=float, copy=True)
        if p.ndim != 2 or p.shape[0] != p.shape[1] or p.shape[0] < 1:
            raise InvalidPairwiseError(f"pairwise matrix must be square, got {p.shape}")
        if not np.all(np.isfinite(p)) or np.any(p <= 0):
            raise InvalidPairwiseError("pairwise entries must be finite and positive")
        if not np.allclose(np.diag(p), 1.0, rtol=0, atol=self.rtol):
            raise InvalidPairwiseError("pairwise diagonal must be 1")
        prod = p * p.T
        if not np.all(np.abs(prod - 1.0) <= self.rtol):
            i, j = np.unravel_index(np.argmax(np.abs(prod - 1.0)), p.shape)
            raise InvalidPairwiseError(
                f"reciprocal property violated at ({i}, {j}): {p[i, j]} * {p[j, i]} != 1"
            )
        p.setflags(write=False)
        object.__setattr__(self, "values", p)

    @classmethod
    def from_upper(cls, upper: Sequence[Sequence[float]]) -> "PairwiseMatrix":
        """Build from the strict upper triangle given row by row.

        ``from_upper([[2, 4], [3]])`` is the 3x3 matrix with p01=2, p02=4, p12=3.
        """
        m = len(upper) + 1
        p = np.ones((m, m))
        for i, row in enumerate(upper):
            if len(row) != m - i - 1:
                raise InvalidPairwiseError(f"upper row {i} should have {m - i - 1} entries")
            for k, v in enumerate(row):
                j = i + 1 + k
                p[i, j] = v
                p[j, i] = 1.0 / v
        return cls(p)

    @property
    def size(self) -> int:
        return self.values.shape[0]


# RSSI > load > delay.
PAIRWISE_RSSI_FIRST = PairwiseMatrix.from_upper([[2.0, 4.0], [3.0]])
# Load-first variant: load is twice as important as RSSI.
PAIRWISE_LOAD_FIRST = PairwiseMatrix.from_upper([[0.5, 4.0], [3.0]])

# Saaty's random consistency index, indexed by matrix order.
RANDOM_INDEX = {1: 0.0, 2: 0.0, 3: 0.58, 4: 0.90, 5: 1.12, 6: 1.24, 7: 1.32, 8: 1.41, 9: 1.45, 10: 1.49}


@dataclass(frozen=True)
class EntropyResult:
    entropy: np.ndarray
    divergence: np.ndarray
    weights: WeightVector


@dataclass(frozen=True)
class RankingResult:
    candidates: tuple[str, ...]
    closeness: np.ndarray
    s_plus: np.ndarray
    s_minus: np.ndarray
    ideal: np.ndarray
    negative_ideal: np.ndarray
    order: tuple[int, ...]
    tie_breaks: tuple[tuple[int, str], ...] = ()
    weights: WeightVector | None = None
    weighted: np.ndarray | None = field(default=None, repr=False)

    @property
    def ranked(self) -> list[str]:
        return [self.candidates[i] for i in self.order]

    def rank_of(self, candidate: str) -> int:
        """1-based rank of ``candidate``."""
        return self.order.index(self.candidates.index(candidate)) + 1

    @property
    def best(self) -> str:
        return self.candidates[self.order[0]]


def dbm_to_milliwatt(p):
    """Convert dBm to milliwatts (scalar or array)."""
    arr = np.asarray(p, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError("dBm value must be finite")
    out = np.power(10.0, arr / 10.0)
    return float(out) if out.ndim == 0 else out


def to_linear_power(d: DecisionMatrix) -> DecisionMatrix:
    """Return ``d`` with every dBm column converted to milliwatts."""
    if not any(c.unit == "dBm" for c in d.criteria):
        return d
    vals = d.values.copy()
    crits = list(d.criteria)
    for j, crit in enumerate(crits):
        if crit.unit == "dBm":
            vals[:, j] = dbm_to_milliwatt(vals[:, j])
            crits[j] = Criterion(crit.name, crit.direction, "mW")
    return DecisionMatrix(d.candidates, tuple(crits), vals)


def _checked_values(d: DecisionMatrix) -> np.ndarray:
    for j, crit in enumerate(d.criteria):
        if crit.unit == "dBm":
            raise MCDMError(f"column {crit.name!r} is still in dBm; convert with to_linear_power")
        if np.any(d.values[:, j] < 0):
            raise MCDMError(f"column {crit.name!r} has negative entries; normalization undefined")
    return d.values


def linear_normalize(d: DecisionMatrix) -> NormalizedMatrix:
    x = _checked_values(d)
    sums = x.sum(axis=0)
    for j, s in enumerate(sums):
        if s == 0:
            raise DegenerateColumnError(j, d.criteria[j].name)
    return NormalizedMatrix(x / sums, "linear")


def vector_normalize(d: DecisionMatrix) -> NormalizedMatrix:
    x = _checked_values(d)
    norms = np.sqrt((x * x).sum(axis=0))
    for j, s in enumerate(norms):
        if s == 0:
            raise DegenerateColumnError(j, d.criteria[j].name)
    return NormalizedMatrix(x / norms, "vector")


def entropy_weights(r: NormalizedMatrix) -> EntropyResult:
    """Shannon-entropy criterion weights from a linearly normalized matrix.

    Zero entries contribute nothing to the entropy sum. When every column is
    constant the divergences vanish and uniform weights are returned with
    provenance ``uniform_fallback``.
    """
    if r.scheme != "linear":
        raise MCDMError("entropy weights need a linearly normalized matrix")
    vals = r.values
    n, m = vals.shape
    if n < 2:
        raise SingleCandidateError("entropy is undefined for a single candidate")
    k = 1.0 / math.log(n)
    safe = np.where(vals > 0, vals, 1.0)
    terms = np.where(vals > 0, vals * np.log(safe), 0.0)
    e = -k * terms.sum(axis=0)
    # a uniform column can land an ulp above 1; its divergence is zero
    d = np.clip(1.0 - e, 0.0, None)
    total = d.sum()
    if total < DEGENERATE_SEPARATION:
        w = WeightVector.uniform(m)
    else:
        w = WeightVector(d / total, "entropy")
    return EntropyResult(e, d, w)


def ahp_weights(p: PairwiseMatrix) -> WeightVector:
    """Column-normalize the pairwise matrix, then average each row."""
    vals = p.values
    w = (vals / vals.sum(axis=0)).mean(axis=1)
    return WeightVector(w / w.sum(), "ahp")


def principal_eigenvalue(p: PairwiseMatrix, tol: float = 1e-9, max_iter: int = 1000) -> float:
    vals = p.values
    v = np.full(vals.shape[0], 1.0 / vals.shape[0])
    lam = 0.0
    for _ in range(max_iter):
        nxt = vals @ v
        lam_new = nxt.sum() / v.sum()
        nxt = nxt / nxt.sum()
        if abs(lam_new - lam) < tol and np.max(np.abs(nxt - v)) < tol:
            return float(lam_new)
        v, lam = nxt, lam_new
    raise ConvergenceError(f"power iteration did not converge in {max_iter} iterations")


def consistency_ratio(p: PairwiseMatrix) -> float:
    """Saaty consistency ratio; 0 for matrices of order 1 or 2."""
    m = p.size
    if m <= 2:
        return 0.0
    if m not in RANDOM_INDEX:
        raise MCDMError(f"no random index tabulated for order {m}")
    lam = principal_eigenvalue(p)
    ci = (lam - m) / (m - 1)
    return max(ci, 0.0) / RANDOM_INDEX[m]


def apply_weights(r: NormalizedMatrix, w: WeightVector) -> np.ndarray:
    if r.values.shape[1] != len(w):
        raise MCDMError(f"{r.values.shape[1]} criteria but {len(w)} weights")
    return r.values * w.weights


def _directions(criteria: Sequence[Criterion | Direction | str]) -> np.ndarray:
    out = []
    for c in criteria:
        direction = c.direction if isinstance(c, Criterion) else Direction(c)
        out.append(direction is Direction.BENEFIT)
    return np.array(out, dtype=bool)


def topsis_score(
    v: np.ndarray,
    criteria: Sequence[Criterion | Direction | str],
    candidates: Sequence[str] | None = None,
    current: str | None = None,
    loads: Sequence[float] | None = None,
) -> RankingResult:
    """Score a weighted normalized matrix by relative closeness to the ideal.

    Candidates with equal closeness (within 1e-12) are ordered by: the
    currently attached candidate first, then lower raw load, then the
    lexicographically smaller identifier.
    """
    v = np.asarray(v, dtype=float)
    if v.ndim != 2 or v.shape[0] < 1:
        raise MCDMError("weighted matrix must be 2-D with at least one row")
    n, m = v.shape
    benefit = _directions(criteria)
    if benefit.size != m:
        raise MCDMError(f"{m} columns but {benefit.size} criteria")
    if candidates is None:
        candidates = tuple(str(i) for i in range(n))
    candidates = tuple(candidates)
    if len(candidates) != n:
        raise MCDMError("candidate list does not match matrix rows")
    if loads is not None and len(loads) != n:
        raise MCDMError("load list does not match matrix rows")

    col_max = v.max(axis=0)
    col_min = v.min(axis=0)
    ideal = np.where(benefit, col_max, col_min)
    negative = np.where(benefit, col_min, col_max)
    s_plus = np.sqrt(((v - ideal) ** 2).sum(axis=1))
    s_minus = np.sqrt(((v - negative) ** 2).sum(axis=1))
    denom = s_plus + s_minus
    closeness = np.where(denom < DEGENERATE_SEPARATION, 0.5, s_minus / np.where(denom > 0, denom, 1.0))

    order, ties = _order_with_ties(closeness, candidates, current, loads)
    return RankingResult(
        candidates=candidates,
        closeness=closeness,
        s_plus=s_plus,
        s_minus=s_minus,
        ideal=ideal,
        negative_ideal=negative,
        order=order,
        tie_breaks=ties,
        weighted=v,
    )


def _order_with_ties(closeness, candidates, current, loads):
    n = len(candidates)
    by_score = sorted(range(n), key=lambda i: -closeness[i])
    groups: list[list[int]] = []
    for i in by_score:
        if groups and abs(closeness[groups[-1][-1]] - closeness[i]) <= TIE_TOL:
            groups[-1].append(i)
        else:
            groups.append([i])

    def key(i):
        return (
            0 if candidates[i] == current else 1,
            loads[i] if loads is not None else 0.0,
            candidates[i],
        )

    order: list[int] = []
    ties: list[tuple[int, str]] = []
    for grp in groups:
        grp.sort(key=key)
        for a, b in zip(grp, grp[1:]):
            ka, kb = key(a), key(b)
            rule = "current" if ka[0] != kb[0] else "load" if ka[1] != kb[1] else "id"
            ties.append((a, rule))
        order.extend(grp)
    return tuple(order), tuple(ties)


def rank_candidates(
    d: DecisionMatrix,
    mode: str = "entropy",
    weights: WeightVector | None = None,
    current: str | None = None,
) -> RankingResult:
    """Run the full ranking pipeline on a raw decision matrix.

    ``mode="entropy"`` derives weights from the instantaneous matrix and
    scores the linearly normalized values; ``mode="ahp"`` scores the vector
    normalized values with the supplied (precomputed) ``weights``.
    """
    loads = _loads_or_none(d)
    n, m = d.shape
    if n == 1:
        return RankingResult(
            candidates=d.candidates,
            closeness=np.array([0.5]),
            s_plus=np.zeros(1),
            s_minus=np.zeros(1),
            ideal=np.zeros(m),
            negative_ideal=np.zeros(m),
            order=(0,),
            weights=weights,
        )
    lin = to_linear_power(d)
    if mode == "entropy":
        r = linear_normalize(lin)
        w = entropy_weights(r).weights
    elif mode == "ahp":
        if weights is None:
            raise MCDMError("ahp mode needs precomputed weights")
        r = vector_normalize(lin)
        w = weights
    else:
        raise MCDMError(f"unknown ranking mode {mode!r}")
    v = apply_weights(r, w)
    res = topsis_score(v, d.criteria, d.candidates, current=current, loads=loads)
    return replace(res, weights=w)


def _loads_or_none(d: DecisionMatrix):
    try:
        return d.column("load")
    except KeyError:
        return None

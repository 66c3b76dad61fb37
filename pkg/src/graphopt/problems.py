"""Problem abstraction: decision spaces, fitness, and graph bindings.

A problem binds a decision space to a fitness function in one of two
ways.  Pattern A substitutes the decoded decision vector into query
templates and executes them per evaluation, memoizing on a 64-bit hash
of the quantized vector.  Pattern B runs its queries once at startup,
keeps the resulting per-candidate arrays, and evaluates as a pure
function over them.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional, Sequence

import numpy as np

from .graph import PropertyGraph
from .querylang import ExecutionError, Query, QueryTemplate, execute, substitute

FNV_OFFSET = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3
_MASK64 = (1 << 64) - 1

SELECTION_EPS = 1e-6


class MaterializationError(ValueError):
    """Startup queries produced arrays that cannot be aligned."""


# ---------------------------------------------------------------------------
# decision spaces
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DecisionSpace:
    """Box-bounded decision space, optionally a k-of-N selection.

    kind is one of 'continuous', 'integer', 'selection'.  For selection
    spaces dim equals k and every coordinate ranges over [0, N - eps) so
    flooring yields an index in [0, N-1].
    """

    kind: str
    lower: np.ndarray
    upper: np.ndarray
    k: int = 0
    n_candidates: int = 0

    def __post_init__(self):
        lower = np.asarray(self.lower, dtype=np.float64)
        upper = np.asarray(self.upper, dtype=np.float64)
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)
        if self.kind not in ("continuous", "integer", "selection"):
            raise ValueError(f"unknown space kind {self.kind!r}")
        if lower.shape != upper.shape or lower.ndim != 1 or lower.size == 0:
            raise ValueError("bounds must be equal-length 1-D arrays")
        if not np.all(lower < upper):
            raise ValueError("every dimension needs lower < upper")
        lower.setflags(write=False)
        upper.setflags(write=False)

    @property
    def dim(self) -> int:
        return self.lower.size

    def contains(self, x: np.ndarray) -> bool:
        x = np.asarray(x, dtype=np.float64)
        return bool(np.all(x >= self.lower) and np.all(x <= self.upper))


def continuous_space(lower, upper) -> DecisionSpace:
    lower = np.atleast_1d(np.asarray(lower, dtype=np.float64))
    upper = np.atleast_1d(np.asarray(upper, dtype=np.float64))
    return DecisionSpace(kind="continuous", lower=lower, upper=upper)


def integer_space(lower, upper) -> DecisionSpace:
    lower = np.atleast_1d(np.asarray(lower, dtype=np.float64))
    upper = np.atleast_1d(np.asarray(upper, dtype=np.float64))
    return DecisionSpace(kind="integer", lower=lower, upper=upper)


def selection_space(k: int, n_candidates: int) -> DecisionSpace:
    """k-of-N selection: k coordinates, each flooring to a candidate index."""
    if k < 1:
        raise ValueError("selection needs k >= 1")
    if k > n_candidates:
        raise ValueError(f"cannot select {k} of {n_candidates} candidates")
    lower = np.zeros(k)
    upper = np.full(k, float(n_candidates) - SELECTION_EPS)
    return DecisionSpace(kind="selection", lower=lower, upper=upper,
                         k=k, n_candidates=n_candidates)


def default_resolution(space: DecisionSpace):
    """Memo quantization grid: 2^32 cells per continuous dimension, unit
    cells for integer and selection dimensions."""
    if space.kind == "continuous":
        return (space.upper - space.lower) / float(2 ** 32)
    return 1.0


def decode_selection(x, space: DecisionSpace) -> list[int]:
    """Map a selection-space vector to k distinct candidate indices.

    Coordinates floor to indices; a duplicate advances cyclically to the
    next unused index, so every in-bounds vector decodes to a valid
    selection.
    """
    if space.kind != "selection":
        raise ValueError("decode_selection needs a selection space")
    n = space.n_candidates
    top = n - 1
    chosen: list[int] = []
    used = set()
    values = x.tolist() if isinstance(x, np.ndarray) else x
    for value in values:
        idx = int(value)
        if idx > top:
            idx = top
        elif idx < 0:
            idx = 0
        while idx in used:
            idx += 1
            if idx == n:
                idx = 0
        used.add(idx)
        chosen.append(idx)
    return chosen


# ---------------------------------------------------------------------------
# memo keys
# ---------------------------------------------------------------------------

def _fnv1a64(data: bytes) -> int:
    h = FNV_OFFSET
    for b in data:
        h = ((h ^ b) * FNV_PRIME) & _MASK64
    return h


def memo_key(x, resolution) -> int:
    """64-bit FNV-1a hash of the quantized decision vector.

    Quantization maps each coordinate to round(x_j / resolution) as a
    signed 64-bit integer; the hash runs over the little-endian bytes of
    that integer sequence.
    """
    q = np.rint(np.asarray(x, dtype=np.float64) / resolution).astype("<i8")
    return _fnv1a64(q.tobytes())


def memo_keys_batch(q: np.ndarray) -> np.ndarray:
    """Vectorized FNV-1a over rows of an int64 matrix (one key per row)."""
    raw = np.ascontiguousarray(q.astype("<i8")).view(np.uint8)
    raw = raw.reshape(q.shape[0], q.shape[1] * 8)
    h = np.full(q.shape[0], FNV_OFFSET, dtype=np.uint64)
    prime = np.uint64(FNV_PRIME)
    for col in range(raw.shape[1]):
        h ^= raw[:, col].astype(np.uint64)
        h *= prime
    return h


def selection_memo_key(indices: Sequence[int]) -> int:
    # canonical form: sorted index set, so permutations of the same
    # selection share one memo entry
    q = np.sort(np.asarray(indices, dtype="<i8"))
    return _fnv1a64(q.tobytes())


# ---------------------------------------------------------------------------
# fitness
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Fitness:
    """Minimization fitness with its penalty decomposition.

    total is exactly sum(objective_terms.values()) plus
    sum(weight[name] * violation_terms[name]) in insertion order.
    """

    total: float
    objective_terms: dict
    violation_terms: dict
    penalty_weights: dict

    @property
    def penalty_weighted_total(self) -> float:
        return weighted_total(self.objective_terms, self.violation_terms,
                              self.penalty_weights)

    @property
    def feasible(self) -> bool:
        return all(v == 0 for v in self.violation_terms.values())


def weighted_total(objective_terms: Mapping[str, float],
                   violation_terms: Mapping[str, float],
                   penalty_weights: Mapping[str, float]) -> float:
    total = 0.0
    for value in objective_terms.values():
        total += value
    for name, violation in violation_terms.items():
        total += penalty_weights[name] * violation
    return total


def assemble_fitness(objective_terms: Mapping[str, float],
                     violation_terms: Mapping[str, float],
                     penalty_weights: Mapping[str, float]) -> Fitness:
    if not violation_terms:
        total = 0.0
        for value in objective_terms.values():
            total += value
        return Fitness(total, dict(objective_terms), {}, {})
    for name, violation in violation_terms.items():
        if violation < 0:
            raise ValueError(f"violation term {name!r} is negative: {violation}")
        if name not in penalty_weights:
            raise ValueError(f"violation term {name!r} has no penalty weight")
    objective_terms = dict(objective_terms)
    violation_terms = dict(violation_terms)
    penalty_weights = dict(penalty_weights)
    return Fitness(
        total=weighted_total(objective_terms, violation_terms, penalty_weights),
        objective_terms=objective_terms,
        violation_terms=violation_terms,
        penalty_weights=penalty_weights,
    )


# ---------------------------------------------------------------------------
# Pattern A: per-evaluation queries with memoization
# ---------------------------------------------------------------------------

@dataclass
class QueryTerm:
    """One fitness term sourced by a query template.

    The template's scalar result is multiplied by ``coefficient`` for
    objective terms; constraint terms report the raw value as the
    violation degree and ``coefficient`` is the penalty weight.
    """

    name: str
    template: QueryTemplate
    coefficient: float = 1.0
    scalars: dict = field(default_factory=dict)


@dataclass
class PatternABinding:
    """Evaluates fitness by substituting the decoded selection into
    query templates and executing them against the graph per call.

    A 64-bit hash of the canonical quantized vector keys the memo
    table, so a selection already scored never touches the graph again.
    """

    graph: PropertyGraph
    space: DecisionSpace
    candidates: list[int]
    objective_terms: list[QueryTerm]
    constraint_terms: list[QueryTerm] = field(default_factory=list)
    selection_param: str = "selected"
    resolution: float = 1.0
    memoize: bool = True

    evaluations: int = 0
    memo_hits: int = 0
    query_executions: int = 0

    def __post_init__(self):
        self._memo: dict[int, Fitness] = {}
        self.missing_counts: dict[str, int] = {}
        if self.space.kind == "selection" and len(self.candidates) != self.space.n_candidates:
            raise ValueError("candidate list does not match the selection space")

    def _key(self, x) -> int:
        if self.space.kind == "selection":
            return selection_memo_key(decode_selection(x, self.space))
        return memo_key(x, self.resolution)

    def _run(self, term: QueryTerm, selected_ids: list[int]):
        query = substitute(term.template, scalars=term.scalars,
                           lists={self.selection_param: selected_ids})
        try:
            table = execute(self.graph, query)
        except ExecutionError as err:
            raise ExecutionError(f"term {term.name!r}: {err}") from err
        self.query_executions += 1
        self.missing_counts[term.name] = (
            self.missing_counts.get(term.name, 0) + table.missing_property_count)
        value = table.scalar()
        if value is None or isinstance(value, (list, str)):
            raise ExecutionError(
                f"term {term.name!r}: query produced a non-numeric value {value!r}")
        return value

    def evaluate(self, x) -> Fitness:
        self.evaluations += 1
        key = self._key(x)
        if self.memoize:
            cached = self._memo.get(key)
            if cached is not None:
                self.memo_hits += 1
                return cached

        indices = decode_selection(x, self.space)
        selected_ids = [self.candidates[i] for i in indices]
        objective = {}
        for term in self.objective_terms:
            objective[term.name] = term.coefficient * self._run(term, selected_ids)
        violations = {}
        weights = {}
        for term in self.constraint_terms:
            violations[term.name] = float(self._run(term, selected_ids))
            weights[term.name] = term.coefficient
        fitness = assemble_fitness(objective, violations, weights)
        if self.memoize:
            self._memo[key] = fitness
        return fitness


def evaluate_pattern_a(binding: PatternABinding, graph: PropertyGraph, x) -> Fitness:
    if graph is not binding.graph:
        raise ValueError("binding was constructed against a different graph")
    return binding.evaluate(x)


# ---------------------------------------------------------------------------
# Pattern B: startup materialization, pure evaluation
# ---------------------------------------------------------------------------

def materialize(graph: PropertyGraph, queries: Mapping[str, Query]):
    """Run startup queries and convert each to a named value array.

    Every query must return a single column with one row per candidate;
    all arrays must come out the same length.  A missing property shows
    up as a None entry plus a per-array missing count (the degeneracy
    detector's input).  Returns (arrays, missing_counts, provenance).
    """
    arrays: dict[str, tuple] = {}
    missing_counts: dict[str, int] = {}
    provenance: list[str] = []
    length: Optional[int] = None
    for name, query in queries.items():
        table = execute(graph, query)
        if len(table.columns) != 1:
            raise MaterializationError(
                f"array {name!r}: expected 1 column, got {len(table.columns)}")
        values = tuple(row[0] for row in table.rows)
        if length is None:
            length = len(values)
        elif len(values) != length:
            raise MaterializationError(
                f"array {name!r} has {len(values)} rows, expected {length}")
        arrays[name] = values
        missing_counts[name] = table.missing_property_count
        provenance.append(f"{name}: {query.text}")
    return arrays, missing_counts, tuple(provenance)


TermFn = Callable[..., tuple[dict, dict]]


@dataclass
class PatternBBinding:
    """Pure-function evaluation over arrays materialized at startup.

    ``fitness_fn(x, arrays)`` returns (objective_terms, violation_terms);
    the binding assembles the penalty-weighted total.  Arrays never
    change after construction and evaluation performs no queries.

    ``memoize`` caches fitness per decoded subset.  Only valid on
    selection spaces whose fitness depends on the subset alone; it
    never changes results, it just skips recomputing a seen subset.
    """

    space: DecisionSpace
    arrays: Mapping[str, tuple]
    fitness_fn: TermFn
    penalty_weights: dict = field(default_factory=dict)
    provenance: tuple = ()
    missing_counts: Mapping[str, int] = field(default_factory=dict)
    # which arrays feed which term, for per-term missing-data reporting
    term_sources: Mapping[str, tuple] = field(default_factory=dict)
    memoize: bool = False

    evaluations: int = 0
    memo_hits: int = 0

    def __post_init__(self):
        if self.memoize and self.space.kind != "selection":
            raise ValueError("subset memoization needs a selection space")
        self._memo: dict[tuple, Fitness] = {}
        frozen = {}
        for name, values in self.arrays.items():
            if isinstance(values, np.ndarray):
                values = values.copy()
                values.setflags(write=False)
            else:
                values = tuple(values)
            frozen[name] = values
        self.arrays = frozen

    def evaluate(self, x) -> Fitness:
        self.evaluations += 1
        if self.memoize:
            key = tuple(sorted(decode_selection(x, self.space)))
            cached = self._memo.get(key)
            if cached is not None:
                self.memo_hits += 1
                return cached
            objective, violations = self.fitness_fn(x, self.arrays)
            fitness = assemble_fitness(objective, violations, self.penalty_weights)
            self._memo[key] = fitness
            return fitness
        objective, violations = self.fitness_fn(x, self.arrays)
        return assemble_fitness(objective, violations, self.penalty_weights)


def evaluate_pattern_b(binding: PatternBBinding, x) -> Fitness:
    return binding.evaluate(x)


@dataclass
class CallableBinding:
    """Plain function binding for tests and synthetic landscapes."""

    space: DecisionSpace
    fn: Callable[[np.ndarray], Fitness]
    evaluations: int = 0

    def evaluate(self, x) -> Fitness:
        self.evaluations += 1
        return self.fn(x)


def objective_only(total_fn: Callable[[np.ndarray], float],
                   name: str = "objective") -> Callable[[np.ndarray], Fitness]:
    def fn(x) -> Fitness:
        return assemble_fitness({name: float(total_fn(x))}, {}, {})
    return fn

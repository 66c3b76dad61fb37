"""Paired nonparametric testing for the benchmark matrix.

Wilcoxon signed-rank (exact for small samples, normal approximation
with tie and continuity corrections above that), Holm step-down
correction, and the per-problem summary/dominance table.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

EXACT_CUTOFF = 25
ALPHA = 0.05


class DegenerateSample(ValueError):
    """Every paired difference is zero; the test carries no information."""


@dataclass(frozen=True)
class TestResult:
    statistic: float          # W = min(W+, W-)
    p_value: float            # two-sided
    n_effective: int          # pairs left after zero-difference removal
    method: str               # 'exact' | 'normal'


def _ranks_of_abs(diffs: Sequence[float]) -> list[float]:
    """Average ranks of |d|, 1-based, ties averaged."""
    order = sorted(range(len(diffs)), key=lambda i: abs(diffs[i]))
    ranks = [0.0] * len(diffs)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and abs(diffs[order[j + 1]]) == abs(diffs[order[i]]):
            j += 1
        avg = (i + j) / 2.0 + 1.0
        for pos in range(i, j + 1):
            ranks[order[pos]] = avg
        i = j + 1
    return ranks


def _exact_two_sided(scaled_ranks: list[int], scaled_w_plus: int) -> float:
    """Tail probability over all 2^n sign assignments.

    Ranks are scaled by 2 so tie-averaged ranks stay integral; dp[w]
    counts assignments whose scaled W+ equals w (exact in float64 for
    n <= 25 since 2^25 < 2^53).
    """
    total = sum(scaled_ranks)
    dp = [0.0] * (total + 1)
    dp[0] = 1.0
    for r in scaled_ranks:
        for w in range(total, r - 1, -1):
            if dp[w - r]:
                dp[w] += dp[w - r]
    n_assignments = 2.0 ** len(scaled_ranks)
    lo = sum(dp[: scaled_w_plus + 1]) / n_assignments
    hi = sum(dp[scaled_w_plus:]) / n_assignments
    return min(1.0, 2.0 * min(lo, hi))


def wilcoxon_signed_rank(differences: Sequence[float]) -> TestResult:
    """Two-sided Wilcoxon signed-rank test on paired differences.

    Zero differences are dropped.  n_effective <= 25 uses the exact
    sign-assignment distribution; larger samples use the normal
    approximation with tie and continuity corrections.
    """
    diffs = [float(d) for d in differences if d != 0.0]
    if not diffs:
        raise DegenerateSample("all paired differences are zero")
    n = len(diffs)
    ranks = _ranks_of_abs(diffs)
    w_plus = sum(r for r, d in zip(ranks, diffs) if d > 0)
    w_minus = sum(r for r, d in zip(ranks, diffs) if d < 0)
    statistic = min(w_plus, w_minus)

    if n <= EXACT_CUTOFF:
        scaled = [int(round(2.0 * r)) for r in ranks]
        p = _exact_two_sided(scaled, int(round(2.0 * w_plus)))
        return TestResult(statistic, p, n, "exact")

    mean = n * (n + 1) / 4.0
    var = n * (n + 1) * (2 * n + 1) / 24.0
    # tie correction: each group of t tied |d| removes (t^3 - t)/48
    seen: dict[float, int] = {}
    for d in diffs:
        key = abs(d)
        seen[key] = seen.get(key, 0) + 1
    var -= sum(t ** 3 - t for t in seen.values()) / 48.0
    if var <= 0:
        raise DegenerateSample("tie correction removed all variance")
    z = (statistic - mean + 0.5) / math.sqrt(var)
    p = min(1.0, math.erfc(-z / math.sqrt(2.0)))  # 2 * Phi(z) for z <= 0
    return TestResult(statistic, max(p, 5e-324), n, "normal")


def holm(pvalues: Sequence[float]) -> list[float]:
    """Holm step-down adjustment, output aligned to input order."""
    m = len(pvalues)
    for p in pvalues:
        if not 0.0 < p <= 1.0:
            raise ValueError(f"p-value out of (0, 1]: {p}")
    order = sorted(range(m), key=lambda i: pvalues[i])
    adjusted = [0.0] * m
    running = 0.0
    for rank, idx in enumerate(order):
        running = max(running, min(1.0, (m - rank) * pvalues[idx]))
        adjusted[idx] = running
    return adjusted


# ---------------------------------------------------------------------------
# summary construction
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CellSummary:
    problem: str
    solver: str
    n: int
    mean: Optional[float]
    std: Optional[float]      # sample std (ddof=1); None when n < 2
    best: Optional[float]
    worst: Optional[float]
    insufficient: bool        # fewer than 2 seeds: excluded from tests


@dataclass(frozen=True)
class Comparison:
    problem: str
    winner: str
    other: str
    statistic: Optional[float]
    p_raw: Optional[float]
    p_holm: Optional[float]
    method: str               # 'exact' | 'normal' | 'degenerate'


@dataclass(frozen=True)
class ProblemVerdict:
    problem: str
    winner: Optional[str]     # best-mean solver among sufficient cells
    dominant: bool            # every corrected p < ALPHA
    comparisons: tuple[Comparison, ...]
    note: str = ""


@dataclass(frozen=True)
class SummaryTable:
    cells: tuple[CellSummary, ...]
    verdicts: tuple[ProblemVerdict, ...]


def _cell_stats(problem: str, solver: str, by_seed: Mapping[int, float]) -> CellSummary:
    values = [by_seed[s] for s in sorted(by_seed)]
    n = len(values)
    if n == 0:
        return CellSummary(problem, solver, 0, None, None, None, None, True)
    mean = sum(values) / n
    std = None
    if n >= 2:
        std = math.sqrt(sum((v - mean) ** 2 for v in values) / (n - 1))
    return CellSummary(problem, solver, n, mean, std, min(values),
                       max(values), n < 2)


def build_summary(fitness: Mapping[str, Mapping[str, Mapping[int, float]]]) -> SummaryTable:
    """Summary over a {problem: {solver: {seed: fitness}}} matrix.

    Per problem, the best-mean solver is tested pairwise against every
    other sufficient solver (Wilcoxon on seed-aligned differences,
    Holm-corrected within the problem); it is flagged dominant only if
    every corrected p-value clears ALPHA.
    """
    cells: list[CellSummary] = []
    verdicts: list[ProblemVerdict] = []
    for problem in sorted(fitness):
        solvers = fitness[problem]
        problem_cells = {s: _cell_stats(problem, s, solvers[s])
                         for s in sorted(solvers)}
        cells.extend(problem_cells.values())

        usable = {s: c for s, c in problem_cells.items() if not c.insufficient}
        if not usable:
            verdicts.append(ProblemVerdict(problem, None, False, (),
                                           "no cell has 2 or more seeds"))
            continue
        winner = min(usable, key=lambda s: (usable[s].mean, s))

        comparisons: list[Comparison] = []
        raw_ps: list[Optional[float]] = []
        for other in sorted(usable):
            if other == winner:
                continue
            shared = sorted(set(solvers[winner]) & set(solvers[other]))
            diffs = [solvers[winner][s] - solvers[other][s] for s in shared]
            try:
                res = wilcoxon_signed_rank(diffs)
                comparisons.append(Comparison(problem, winner, other,
                                              res.statistic, res.p_value,
                                              None, res.method))
                raw_ps.append(res.p_value)
            except DegenerateSample:
                comparisons.append(Comparison(problem, winner, other,
                                              None, None, None, "degenerate"))
                raw_ps.append(None)

        defined = [p for p in raw_ps if p is not None]
        corrected = holm(defined) if defined else []
        it = iter(corrected)
        finished = [
            c if c.p_raw is None else Comparison(
                c.problem, c.winner, c.other, c.statistic, c.p_raw,
                next(it), c.method)
            for c in comparisons
        ]
        dominant = (len(finished) > 0
                    and all(c.p_holm is not None and c.p_holm < ALPHA
                            for c in finished))
        note = ""
        if any(c.method == "degenerate" for c in finished):
            note = "degenerate comparison present; no dominance claim"
        verdicts.append(ProblemVerdict(problem, winner, dominant,
                                       tuple(finished), note))
    return SummaryTable(tuple(cells), tuple(verdicts))

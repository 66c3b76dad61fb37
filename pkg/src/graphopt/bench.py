"""Benchmark matrix: problems x solver variants x seeds, with reports.

A bench run generates each instance once, runs every (variant, seed)
cell against a cell-private binding, collects oracle optima, builds the
statistical summary, and emits spec.json / results.csv / summary.md /
degeneracy.md.  Everything except wall-clock timings is a pure function
of the config, at any worker count.
"""

from __future__ import annotations

import csv
import io
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .oracles import OracleTooLarge
from .rng import SeededRng
from .solvers import (DISPLAY_NAMES, VARIANT_LABELS, RunResult, SolverConfig,
                      normalize_variant, run)
from .stats import SummaryTable, build_summary
from .suite import (PROBLEM_IDS, Instance, detect_degenerate_terms,
                    fresh_binding, gap_ratio, generate, solve_oracle)

DEFAULT_VARIANTS = ("bmwr", "jaya", "samp_jaya", "ehr_jaya", "rao1")
_SEED_STREAM = 4242


@dataclass(frozen=True)
class BenchConfig:
    problems: tuple = PROBLEM_IDS
    variants: tuple = DEFAULT_VARIANTS
    n_seeds: int = 30
    master_seed: int = 0
    scale: str = "small"
    pop_size: int = 30
    iterations: int = 300
    workers: int = 1
    p5_mode: str = "linear"
    degeneracy_samples: int = 200

    def __post_init__(self):
        object.__setattr__(self, "problems",
                           tuple(p.upper() for p in self.problems))
        object.__setattr__(self, "variants",
                           tuple(normalize_variant(v) for v in self.variants))
        if self.n_seeds < 1:
            raise ValueError("need at least one seed")
        if self.workers < 1:
            raise ValueError("need at least one worker")

    def run_seeds(self) -> list[int]:
        rng = SeededRng(self.master_seed, stream=_SEED_STREAM)
        return [rng.integer(0, 2 ** 31) for _ in range(self.n_seeds)]

    @classmethod
    def from_dict(cls, raw: dict) -> "BenchConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(raw) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        coerced = dict(raw)
        for key in ("problems", "variants"):
            if key in coerced:
                coerced[key] = tuple(coerced[key])
        return cls(**coerced)


@dataclass(frozen=True)
class CellResult:
    problem: str
    variant: str          # canonical label, e.g. SAMPJaya
    seed: int
    run: Optional[RunResult]
    error: Optional[str] = None


@dataclass
class BenchReport:
    config: BenchConfig
    instances: dict
    oracles: dict          # problem -> OracleResult | None
    oracle_errors: dict    # problem -> str, for oracles that refused
    cells: list
    summary: SummaryTable
    degeneracy: dict       # problem -> DegeneracyReport
    environment: dict


# worker processes keep generated instances for the life of the pool
_INSTANCE_CACHE: dict = {}


def _cached_instance(problem: str, scale: str, seed: int, p5_mode: str) -> Instance:
    key = (problem, scale, seed, p5_mode)
    inst = _INSTANCE_CACHE.get(key)
    if inst is None:
        inst = generate(problem, scale, seed, p5_mode=p5_mode)
        _INSTANCE_CACHE[key] = inst
    return inst


def _cell_worker(task: tuple) -> tuple[int, CellResult]:
    (index, problem, scale, master_seed, p5_mode, variant, run_seed,
     pop_size, iterations) = task
    label = VARIANT_LABELS[variant]
    try:
        inst = _cached_instance(problem, scale, master_seed, p5_mode)
        cfg = SolverConfig(variant=variant, pop_size=pop_size,
                           iterations=iterations, seed=run_seed)
        result = run(fresh_binding(inst), cfg)
        return index, CellResult(problem, label, run_seed, result)
    except Exception as err:  # recorded per-cell, the matrix keeps going
        return index, CellResult(problem, label, run_seed, None,
                                 f"{type(err).__name__}: {err}")


def run_matrix(config: BenchConfig) -> BenchReport:
    """Execute the full matrix; deterministic at any worker count."""
    seeds = config.run_seeds()
    tasks = []
    index = 0
    for problem in config.problems:
        for variant in config.variants:
            for seed in seeds:
                tasks.append((index, problem, config.scale,
                              config.master_seed, config.p5_mode, variant,
                              seed, config.pop_size, config.iterations))
                index += 1

    slots: list = [None] * len(tasks)
    if config.workers == 1:
        for task in tasks:
            i, cell = _cell_worker(task)
            slots[i] = cell
    else:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            for i, cell in pool.map(_cell_worker, tasks, chunksize=8):
                slots[i] = cell

    instances, oracles, oracle_errors, degeneracy = {}, {}, {}, {}
    for problem in config.problems:
        inst = _cached_instance(problem, config.scale, config.master_seed,
                                config.p5_mode)
        instances[problem] = inst
        try:
            oracles[problem] = solve_oracle(inst)
        except OracleTooLarge as err:
            oracles[problem] = None
            oracle_errors[problem] = str(err)
        degeneracy[problem] = detect_degenerate_terms(
            inst, samples=config.degeneracy_samples, seed=config.master_seed)

    fitness: dict = {}
    for cell in slots:
        if cell.run is not None:
            fitness.setdefault(cell.problem, {}).setdefault(
                cell.variant, {})[cell.seed] = cell.run.best_total
    summary = build_summary(fitness)

    environment = {
        "package_version": __version__,
        "python": sys.version.split()[0],
        "numpy": np.__version__,
        "master_seed": config.master_seed,
        "scale": config.scale,
        "pop_size": config.pop_size,
        "iterations": config.iterations,
    }
    return BenchReport(config=config, instances=instances, oracles=oracles,
                       oracle_errors=oracle_errors, cells=slots,
                       summary=summary, degeneracy=degeneracy,
                       environment=environment)


# ---------------------------------------------------------------------------
# report emission
# ---------------------------------------------------------------------------

def results_csv_text(report: BenchReport) -> str:
    """CSV body, one row per cell.  wall_ms is informational only; every
    other column is deterministic for a given config."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["problem", "solver", "seed", "fitness", "evals",
                     "memo_hits", "wall_ms", "error"])
    for cell in report.cells:
        if cell.run is None:
            writer.writerow([cell.problem, cell.variant, cell.seed,
                             "", 0, 0, "", cell.error])
        else:
            r = cell.run
            writer.writerow([cell.problem, cell.variant, cell.seed,
                             repr(r.best_total), r.evaluations, r.memo_hits,
                             round(r.wall_seconds * 1000.0, 3), ""])
    return buf.getvalue()


def _fmt(value, digits: int = 4) -> str:
    if value is None:
        return "-"
    return f"{value:.{digits}g}"


def summary_md_text(report: BenchReport) -> str:
    lines = ["# Benchmark summary", ""]
    env = report.environment
    lines.append(f"Package {env['package_version']}, python {env['python']}, "
                 f"numpy {env['numpy']}; master seed {env['master_seed']}, "
                 f"scale {env['scale']}, pop {env['pop_size']}, "
                 f"iterations {env['iterations']}.")
    lines.append("")

    lines.append("## Gap to oracle")
    lines.append("")
    lines.append("Gap 1.0 means the best cell matched the oracle optimum; "
                 "ratios are oriented so that worse solutions give larger "
                 "gaps on every problem.")
    lines.append("")
    lines.append("| problem | best fitness | oracle optimum | gap | oracle |")
    lines.append("|---|---|---|---|---|")
    for problem in report.config.problems:
        cells = [c for c in report.cells
                 if c.problem == problem and c.run is not None]
        best = min((c.run.best_total for c in cells), default=None)
        oracle = report.oracles.get(problem)
        if oracle is None:
            note = report.oracle_errors.get(problem)
            inst = report.instances[problem]
            label = (f"oracle unavailable: {note}" if note
                     else inst.oracle_note)
            lines.append(f"| {problem} | {_fmt(best, 8)} | - | - | {label} |")
            continue
        gap = None if best is None else gap_ratio(best, oracle.optimum)
        note = oracle.note
        if gap is not None and gap < 1.0:
            note = f"gap below 1.0: {note}"
        lines.append(f"| {problem} | {_fmt(best, 8)} | "
                     f"{_fmt(oracle.optimum, 8)} | {_fmt(gap, 5)} | "
                     f"{oracle.kind}: {note} |")
    lines.append("")

    lines.append("## Per-problem results")
    for verdict in report.summary.verdicts:
        lines.append("")
        lines.append(f"### {verdict.problem}")
        lines.append("")
        lines.append("| solver | seeds | mean | std | best | worst |")
        lines.append("|---|---|---|---|---|---|")
        for cell in report.summary.cells:
            if cell.problem != verdict.problem:
                continue
            name = DISPLAY_NAMES.get(cell.solver, cell.solver)
            row = (f"| {name} | {cell.n} | {_fmt(cell.mean, 8)} | "
                   f"{_fmt(cell.std, 5)} | {_fmt(cell.best, 8)} | "
                   f"{_fmt(cell.worst, 8)} |")
            lines.append(row)
        lines.append("")
        if verdict.winner is None:
            lines.append("No solver had enough seeds for testing.")
            continue
        winner = DISPLAY_NAMES.get(verdict.winner, verdict.winner)
        flag = ("statistically dominant"
                if verdict.dominant else "not statistically dominant")
        lines.append(f"Winner by mean: **{winner}** ({flag} at alpha 0.05, "
                     "Holm-corrected Wilcoxon).")
        if verdict.note:
            lines.append(f"Note: {verdict.note}.")
        lines.append("")
        lines.append("| comparison | W | p raw | p Holm | method |")
        lines.append("|---|---|---|---|---|")
        for comp in verdict.comparisons:
            other = DISPLAY_NAMES.get(comp.other, comp.other)
            lines.append(f"| {winner} vs {other} | {_fmt(comp.statistic)} | "
                         f"{_fmt(comp.p_raw, 4)} | {_fmt(comp.p_holm, 4)} | "
                         f"{comp.method} |")
    lines.append("")
    return "\n".join(lines)


def degeneracy_md_text(report: BenchReport) -> str:
    lines = ["# Degenerate-term report", ""]
    lines.append("A term is flagged when it is constant across every "
                 "sampled candidate (max == min): it cannot steer the "
                 "search.")
    for problem in report.config.problems:
        rep = report.degeneracy[problem]
        lines.append("")
        lines.append(f"## {problem} ({rep.samples} samples)")
        lines.append("")
        lines.append("| term | kind | min | max | variance | "
                     "missing properties | flagged |")
        lines.append("|---|---|---|---|---|---|---|")
        for t in rep.terms:
            lines.append(f"| {t.name} | {t.kind} | {_fmt(t.minimum, 6)} | "
                         f"{_fmt(t.maximum, 6)} | {_fmt(t.variance, 6)} | "
                         f"{t.missing_property_count} | "
                         f"{'YES' if t.flagged else 'no'} |")
    lines.append("")
    return "\n".join(lines)


def emit_report(report: BenchReport, directory) -> list[str]:
    """Write spec.json per instance plus the three report files.

    Returns the written paths; IO failures propagate with path context.
    """
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    written = []

    def _write(name: str, data) -> None:
        path = out / name
        try:
            if isinstance(data, bytes):
                path.write_bytes(data)
            else:
                path.write_text(data, encoding="utf-8")
        except OSError as err:
            raise OSError(f"writing {path}: {err}") from err
        written.append(str(path))

    for problem, inst in report.instances.items():
        _write(f"{problem}_spec.json", inst.spec_bytes())
    _write("results.csv", results_csv_text(report))
    _write("summary.md", summary_md_text(report))
    _write("degeneracy.md", degeneracy_md_text(report))
    return written

"""Exact reference solvers used to certify metaheuristic results.

Three oracles: exhaustive k-subset enumeration for the discrete
selection problems, a successive-shortest-paths transportation solver
for the flow problems, and a ramp-relaxed merit-order dispatch for the
linear scheduling mode.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .problems import Fitness

BRUTE_FORCE_LIMIT = 10 ** 6
_EPS = 1e-12


class OracleTooLarge(ValueError):
    """Enumeration would exceed the guard limit."""


class InfeasibleTransport(ValueError):
    """Total supply exceeds total sink capacity (or no augmenting path)."""


class InfeasibleDispatch(ValueError):
    """Hourly demand falls outside the fleet's feasible output range."""


def brute_force_selection(binding, space=None):
    """Exhaustive optimum over all k-of-N selections.

    Subsets are visited in lexicographic order and acceptance is
    strict, so ties resolve to the lexicographically smallest index
    set.  Returns (indices tuple, Fitness).
    """
    space = space or binding.space
    if space.kind != "selection":
        raise ValueError("brute force enumeration needs a selection space")
    n, k = space.n_candidates, space.k
    if math.comb(n, k) > BRUTE_FORCE_LIMIT:
        raise OracleTooLarge(
            f"C({n},{k}) = {math.comb(n, k)} exceeds {BRUTE_FORCE_LIMIT}")
    best_subset = None
    best_fit: Fitness | None = None
    evaluate = binding.evaluate
    for combo in combinations(range(n), k):
        # sorted distinct integers floor back to exactly this subset
        fit = evaluate(list(combo))
        if best_fit is None or fit.total < best_fit.total:
            best_subset, best_fit = combo, fit
    return best_subset, best_fit


# ---------------------------------------------------------------------------
# transportation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TransportationInstance:
    """Ship supplies to capacitated sinks at minimum cost."""

    cost: np.ndarray      # (sources, sinks)
    supply: np.ndarray    # (sources,)
    capacity: np.ndarray  # (sinks,)

    def __post_init__(self):
        cost = np.asarray(self.cost, dtype=np.float64)
        supply = np.asarray(self.supply, dtype=np.float64)
        capacity = np.asarray(self.capacity, dtype=np.float64)
        object.__setattr__(self, "cost", cost)
        object.__setattr__(self, "supply", supply)
        object.__setattr__(self, "capacity", capacity)
        if cost.ndim != 2 or cost.shape != (supply.size, capacity.size):
            raise ValueError("cost matrix shape does not match supply/capacity")
        if not np.all(np.isfinite(cost)) or np.any(cost < 0):
            raise ValueError("costs must be finite and non-negative")
        if np.any(supply < 0) or np.any(capacity < 0):
            raise ValueError("supplies and capacities must be non-negative")
        if supply.sum() > capacity.sum() + _EPS:
            raise InfeasibleTransport(
                f"total supply {supply.sum()} exceeds total capacity "
                f"{capacity.sum()}")


def solve_transportation(instance: TransportationInstance):
    """Minimum-cost shipment of all supply, by successive shortest
    paths with node potentials (reduced-cost tolerance 1e-9).

    Returns (flow matrix, optimal cost).
    """
    n_src = instance.supply.size
    n_snk = instance.capacity.size
    # node ids: 0 = super source, 1..n_src = sources,
    # n_src+1..n_src+n_snk = sinks, last = super sink
    n_nodes = n_src + n_snk + 2
    source, sink = 0, n_nodes - 1

    graph: list[list[int]] = [[] for _ in range(n_nodes)]
    to: list[int] = []
    residual: list[float] = []
    cost_of: list[float] = []

    def add_edge(u: int, v: int, cap: float, cost: float) -> int:
        idx = len(to)
        graph[u].append(idx)
        to.append(v)
        residual.append(cap)
        cost_of.append(cost)
        graph[v].append(idx + 1)
        to.append(u)
        residual.append(0.0)
        cost_of.append(-cost)
        return idx

    total_supply = float(instance.supply.sum())
    middle = np.empty((n_src, n_snk), dtype=np.int64)
    for i in range(n_src):
        add_edge(source, 1 + i, float(instance.supply[i]), 0.0)
        for j in range(n_snk):
            middle[i, j] = add_edge(1 + i, 1 + n_src + j,
                                    total_supply, float(instance.cost[i, j]))
    for j in range(n_snk):
        add_edge(1 + n_src + j, sink, float(instance.capacity[j]), 0.0)

    potential = [0.0] * n_nodes
    shipped = 0.0
    inf = math.inf
    while shipped + _EPS < total_supply:
        # Dijkstra on reduced costs
        dist = [inf] * n_nodes
        prev_edge = [-1] * n_nodes
        dist[source] = 0.0
        heap = [(0.0, source)]
        while heap:
            d, u = heapq.heappop(heap)
            if d > dist[u] + _EPS:
                continue
            for e in graph[u]:
                if residual[e] <= _EPS:
                    continue
                v = to[e]
                reduced = cost_of[e] + potential[u] - potential[v]
                if reduced < 0.0:
                    reduced = 0.0  # float noise; true reduced costs are >= -1e-9
                nd = d + reduced
                if nd + _EPS < dist[v]:
                    dist[v] = nd
                    prev_edge[v] = e
                    heapq.heappush(heap, (nd, v))
        if dist[sink] == inf:
            raise InfeasibleTransport("no augmenting path to the sinks")
        for v in range(n_nodes):
            if dist[v] < inf:
                potential[v] += dist[v]
        # bottleneck along the path
        push = total_supply - shipped
        v = sink
        while v != source:
            e = prev_edge[v]
            push = min(push, residual[e])
            v = to[e ^ 1]
        v = sink
        while v != source:
            e = prev_edge[v]
            residual[e] -= push
            residual[e ^ 1] += push
            v = to[e ^ 1]
        shipped += push

    flow = np.empty((n_src, n_snk), dtype=np.float64)
    for i in range(n_src):
        for j in range(n_snk):
            flow[i, j] = residual[middle[i, j] ^ 1]  # reverse edge holds the flow
    total_cost = float((flow * instance.cost).sum())
    return flow, total_cost


# ---------------------------------------------------------------------------
# dispatch
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DispatchInstance:
    """Generator fleet scheduled over consecutive hours."""

    cost_rate: np.ndarray      # (G,) currency per MWh
    emission_rate: np.ndarray  # (G,) tons per MWh
    min_out: np.ndarray        # (G,) MW floor while committed
    max_out: np.ndarray        # (G,)
    ramp: np.ndarray           # (G,) max |delta| between consecutive hours
    demand: np.ndarray         # (H,)

    def __post_init__(self):
        arrays = {}
        for name in ("cost_rate", "emission_rate", "min_out", "max_out",
                     "ramp", "demand"):
            arr = np.asarray(getattr(self, name), dtype=np.float64)
            object.__setattr__(self, name, arr)
            arrays[name] = arr
        g = arrays["cost_rate"].size
        for name in ("emission_rate", "min_out", "max_out", "ramp"):
            if arrays[name].size != g:
                raise ValueError(f"{name} must have one entry per generator")
        if np.any(arrays["min_out"] > arrays["max_out"]):
            raise ValueError("min_out must not exceed max_out")
        if np.any(arrays["demand"] < 0):
            raise ValueError("demand must be non-negative")

    @property
    def n_generators(self) -> int:
        return self.cost_rate.size

    @property
    def n_hours(self) -> int:
        return self.demand.size


def merit_order_dispatch(instance: DispatchInstance, emission_weight: float):
    """Hour-by-hour greedy fill in ascending effective-rate order.

    Effective rate is cost_rate + emission_weight * emission_rate.
    Every generator runs at least min_out; remaining demand is filled
    cheapest-first.  Ramp limits are ignored, so the result is the
    exact optimum of the ramp-relaxed linear problem and a lower bound
    for the ramped one.  Returns (schedule (G, H), objective value).
    """
    eff = instance.cost_rate + emission_weight * instance.emission_rate
    order = np.argsort(eff, kind="stable")
    base = float(instance.min_out.sum())
    headroom = instance.max_out - instance.min_out

    g, h = instance.n_generators, instance.n_hours
    schedule = np.tile(instance.min_out[:, None], (1, h))
    for hour in range(h):
        need = float(instance.demand[hour]) - base
        if need < -_EPS:
            raise InfeasibleDispatch(
                f"hour {hour}: demand {instance.demand[hour]} below the "
                f"committed minimum output {base}")
        for gen in order:
            if need <= _EPS:
                break
            take = min(need, float(headroom[gen]))
            schedule[gen, hour] += take
            need -= take
        if need > _EPS:
            raise InfeasibleDispatch(
                f"hour {hour}: demand {instance.demand[hour]} exceeds total "
                f"capacity {float(instance.max_out.sum())}")
    objective = float((schedule.sum(axis=1) * eff).sum())
    return schedule, objective

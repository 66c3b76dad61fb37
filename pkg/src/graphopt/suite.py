"""Seeded desk-scale problem generators P1-P7.

Each generator builds a frozen property graph, grounds a fitness
binding in it (P1 through per-evaluation query templates, P2-P7 through
startup materialization), and packages the decision space, a canonical
spec snapshot, and an exact-oracle descriptor into one Instance.

Problems:
  P1 drug-portfolio selection: k drugs maximizing distinct target-gene
     coverage minus a weighted side-effect sum.
  P2 trial-site selection: k sites maximizing trial throughput plus a
     region-diversity bonus.
  P3 freight rerouting: city-to-port shipment fractions minimizing
     demand-weighted road distance under soft balance/capacity penalties.
  P4 physician-deficit targeting: k countries maximizing summed deficit
     below a fixed density threshold plus a diversity bonus.
  P5 generator dispatch over 24 hours: cost plus emission-weighted
     penalty, linear (oracle-comparable) or quadratic-emission mode.
  P6 antibiotic-subclass portfolio: per-pathogen best efficacy
     (inverse of resistance count) minus a resistance-burden penalty.
  P7 evacuation assignment: centroid-to-exit fractions minimizing
     person-hours under soft balance/capacity penalties.
"""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

from .graph import PropertyGraph
from .oracles import (DispatchInstance, TransportationInstance,
                      brute_force_selection, merit_order_dispatch,
                      solve_transportation)
from .problems import (DecisionSpace, PatternABinding, PatternBBinding,
                       QueryTerm, continuous_space, decode_selection,
                       materialize, selection_space)
from .querylang import parse_query, parse_template
from .rng import SeededRng

PROBLEM_IDS = ("P1", "P2", "P3", "P4", "P5", "P6", "P7")
SCALES = ("small", "medium")

WHO_REGIONS = ("AFR", "AMR", "SEAR", "EUR", "EMR", "WPR")
PHYSICIAN_DENSITY_THRESHOLD = 23.0

# problem coefficients; configurable at generate() time, recorded in notes
P1_LAMBDA = 0.5
P2_BETA = 10.0
P4_BETA = 10.0
P6_LAMBDA = 0.1
P5_EMISSION_WEIGHT = 25.0
PENALTY_SCALE = 1000.0  # soft-constraint weight = PENALTY_SCALE * mean rate


@dataclass(frozen=True)
class DisruptionSpec:
    mode: str                 # 'capacity_halving' | 'time_inflation'
    fraction: float
    factor: float = 2.0       # time_inflation only
    seed: int = 0

    def __post_init__(self):
        if self.mode not in ("capacity_halving", "time_inflation"):
            raise ValueError(f"unknown disruption mode {self.mode!r}")
        if not 0.0 <= self.fraction <= 1.0:
            raise ValueError("fraction must be in [0, 1]")
        if self.mode == "time_inflation" and self.factor <= 1.0:
            raise ValueError("inflation factor must exceed 1")


@dataclass
class Instance:
    problem_id: str
    scale: str
    seed: int
    graph: PropertyGraph
    binding: object
    space: DecisionSpace
    spec: dict                      # canonical snapshot, pinned key order
    oracle_kind: Optional[str]      # brute_force | transportation | merit_order | None
    oracle_note: str
    params: dict = field(default_factory=dict)
    disruption: Optional[DisruptionSpec] = None

    def spec_bytes(self) -> bytes:
        return (json.dumps(self.spec, indent=2, ensure_ascii=False) + "\n").encode("utf-8")


def disruption_targets(count: int, fraction: float, seed: int) -> list[int]:
    """ceil(fraction * count) target indices, seeded, without replacement."""
    affected = math.ceil(fraction * count)
    if affected == 0:
        return []
    return sorted(SeededRng(seed, stream=1001).sample(count, affected))


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------

def _bare_query(label: str, prop: str, var: str = "n") -> str:
    return f"MATCH ({var}:{label}) RETURN {var}.{prop}"


def _materialize_props(graph: PropertyGraph, label: str, props: dict) -> tuple:
    """props maps array name -> property name; returns
    (arrays, missing_counts, provenance)."""
    queries = {name: parse_query(_bare_query(label, prop))
               for name, prop in props.items()}
    return materialize(graph, queries)


def _distinct_count(values) -> int:
    """Distinct non-null values; all-null collapses to one bucket,
    mirroring how a fully missing property degrades."""
    present = {v for v in values if v is not None}
    if present:
        return len(present) + (1 if any(v is None for v in values) else 0)
    return 1


def _bucket_codes(values) -> list[int]:
    """Ints with the same distinct-count as _distinct_count: each value
    gets a code, all Nones share one."""
    codes: dict = {}
    return [codes.setdefault(v, len(codes)) for v in values]


def _connected_road_graph(g: PropertyGraph, rng: SeededRng, n_road: int,
                          scale_km: float) -> list[int]:
    """Random geometric road network: chain along x for connectivity
    plus 2-nearest-neighbor shortcuts.  Edges carry length_km both ways."""
    points = [(rng.u01(), rng.u01()) for _ in range(n_road)]
    ids = [g.add_node({"RoadNode"}, {"x": points[i][0], "y": points[i][1]})
           for i in range(n_road)]

    def dist(a: int, b: int) -> float:
        dx = points[a][0] - points[b][0]
        dy = points[a][1] - points[b][1]
        return math.hypot(dx, dy) * scale_km

    seen = set()

    def road(a: int, b: int) -> None:
        if a == b or (a, b) in seen:
            return
        seen.add((a, b))
        seen.add((b, a))
        length = dist(a, b)
        g.add_edge(ids[a], "ROAD", ids[b], {"length_km": length})
        g.add_edge(ids[b], "ROAD", ids[a], {"length_km": length})

    order = sorted(range(n_road), key=lambda i: points[i])
    for a, b in zip(order, order[1:]):
        road(a, b)
    for i in range(n_road):
        nearest = sorted((j for j in range(n_road) if j != i),
                         key=lambda j: dist(i, j))[:2]
        for j in nearest:
            road(i, j)
    return ids


def _pairwise_distances(g: PropertyGraph, src_road: list[int],
                        dst_road: list[int]) -> np.ndarray:
    """(len(dst_road), len(src_road)) matrix; [i, j] is the shortest
    road distance from src_road[j] to dst_road[i]."""
    sp = g.shortest_paths(sorted(set(src_road)), "length_km", "ROAD")
    out = np.empty((len(dst_road), len(src_road)), dtype=np.float64)
    for i, dst in enumerate(dst_road):
        for j, src in enumerate(src_road):
            key = (src, dst)
            if key not in sp:
                raise ValueError("road graph is not connected")
            out[i, j] = sp[key]
    return out


# ---------------------------------------------------------------------------
# P1: drug portfolio, Pattern A
# ---------------------------------------------------------------------------

def _gen_p1(scale: str, seed: int, drop_properties: tuple) -> Instance:
    n_drugs, n_genes, k = (20, 30, 4) if scale == "small" else (60, 90, 4)
    lam = P1_LAMBDA
    rng = SeededRng(seed, stream=1)

    g = PropertyGraph()
    drug_names = [f"DRUG-{i:02d}" for i in range(n_drugs)]
    side_effects = [rng.integer(0, 10) for _ in range(n_drugs)]
    for name, sec in zip(drug_names, side_effects):
        props = {"name": name, "side_effect_count": sec}
        for dropped in drop_properties:
            props.pop(dropped, None)
        g.add_node({"Drug"}, props)
    gene_names = [f"GENE-{i:02d}" for i in range(n_genes)]
    gene_ids = [g.add_node({"Gene"}, {"symbol": s}) for s in gene_names]
    targets: list[list[str]] = []
    for d in range(n_drugs):
        n_t = 1 + rng.integer(0, 5)
        hit = sorted(rng.sample(n_genes, n_t))
        targets.append([gene_names[t] for t in hit])
        for t in hit:
            g.add_edge(d, "TARGETS", gene_ids[t])
    g.freeze()

    coverage = parse_template(
        "MATCH (d:Drug)-[:TARGETS]->(g:Gene) WHERE d.id IN $selected "
        "RETURN count(DISTINCT g.id)")
    burden = parse_template(
        "MATCH (d:Drug) WHERE d.id IN $selected "
        "RETURN sum(d.side_effect_count)")
    space = selection_space(k, n_drugs)
    binding = PatternABinding(
        graph=g, space=space, candidates=list(range(n_drugs)),
        objective_terms=[
            QueryTerm("gene_coverage", coverage, coefficient=-1.0),
            QueryTerm("side_effect_burden", burden, coefficient=lam),
        ])

    spec = {
        "candidates": drug_names,
        "targets": targets,
        "side_effect_counts": side_effects,
        "k": k,
    }
    return Instance(
        problem_id="P1", scale=scale, seed=seed, graph=g, binding=binding,
        space=space, spec=spec, oracle_kind="brute_force",
        oracle_note="discrete selection; oracle-comparable, gap >= 1",
        params={"lambda": lam, "n_genes": n_genes})


# ---------------------------------------------------------------------------
# P2: trial sites, Pattern B (and a Pattern A twin for equivalence checks)
# ---------------------------------------------------------------------------

_COUNTRY_POOL = tuple(
    (f"{region}-C{i}", region) for region in WHO_REGIONS for i in range(3))


def _gen_p2(scale: str, seed: int, drop_properties: tuple) -> Instance:
    n_sites, k = (20, 5) if scale == "small" else (40, 5)
    beta = P2_BETA
    rng = SeededRng(seed, stream=2)

    g = PropertyGraph()
    names, countries, regions, trials = [], [], [], []
    for i in range(n_sites):
        country, region = _COUNTRY_POOL[rng.integer(0, len(_COUNTRY_POOL))]
        names.append(f"SITE-{i:02d}")
        countries.append(country)
        regions.append(region)
        trials.append(20 + rng.integer(0, 381))
        props = {"name": names[i], "country": country,
                 "who_region": region, "trial_count": trials[i]}
        for dropped in drop_properties:
            props.pop(dropped, None)
        g.add_node({"Site"}, props)
    g.freeze()

    arrays, missing, provenance = _materialize_props(
        g, "Site", {"trial_counts": "trial_count", "regions": "who_region"})

    space = selection_space(k, n_sites)
    tc = [0.0 if v is None else float(v) for v in arrays["trial_counts"]]
    codes = _bucket_codes(arrays["regions"])

    def fitness_fn(x, _arrays):
        # sorted so permutations of one subset sum in one order (bit-exact)
        sel = sorted(decode_selection(x, space))
        throughput = 0.0
        seen = set()
        for i in sel:
            throughput += tc[i]
            seen.add(codes[i])
        return ({"trial_throughput": -throughput,
                 "region_diversity": -beta * len(seen)}, {})

    binding = PatternBBinding(
        space=space, arrays=arrays, fitness_fn=fitness_fn,
        provenance=provenance, missing_counts=missing, memoize=True,
        term_sources={"trial_throughput": ("trial_counts",),
                      "region_diversity": ("regions",)})

    spec = {
        "facilities": names,
        "countries": countries,
        "trial_counts": trials,
        "k": k,
    }
    return Instance(
        problem_id="P2", scale=scale, seed=seed, graph=g, binding=binding,
        space=space, spec=spec, oracle_kind="brute_force",
        oracle_note="discrete selection; oracle-comparable, gap >= 1",
        params={"beta": beta})


def pattern_a_binding(instance: Instance) -> PatternABinding:
    """Per-evaluation query binding for a problem normally materialized
    at startup.  Supported for P2; used to check pattern equivalence."""
    if instance.problem_id != "P2":
        raise ValueError(f"no Pattern A formulation for {instance.problem_id}")
    beta = instance.params["beta"]
    throughput = parse_template(
        "MATCH (s:Site) WHERE s.id IN $selected RETURN sum(s.trial_count)")
    diversity = parse_template(
        "MATCH (s:Site) WHERE s.id IN $selected "
        "RETURN count(DISTINCT s.who_region)")
    n = instance.space.n_candidates
    return PatternABinding(
        graph=instance.graph, space=instance.space,
        candidates=list(range(n)),
        objective_terms=[
            QueryTerm("trial_throughput", throughput, coefficient=-1.0),
            QueryTerm("region_diversity", diversity, coefficient=-beta),
        ])


# ---------------------------------------------------------------------------
# P3: freight rerouting, Pattern B, transportation oracle
# ---------------------------------------------------------------------------

def _build_fraction_binding(cost, demand, capacity, obj_name, weight):
    """Shared P3/P7 fitness: x are row-major (source, sink) fractions.

    objective = sum(frac * demand * cost); balance violation is the
    demand-weighted |row sum - 1|; capacity violation is the total
    inflow above each sink's cap.  Units: demand units (tons / people).
    """
    n_src, n_snk = cost.shape

    def fitness_fn(x, _arrays):
        frac = np.asarray(x).reshape(n_src, n_snk)
        shipped = frac * demand[:, None]
        objective = float((shipped * cost).sum())
        balance = float(np.abs(frac.sum(axis=1) - 1.0).dot(demand))
        overflow = float(np.maximum(shipped.sum(axis=0) - capacity, 0.0).sum())
        return ({obj_name: objective},
                {"balance": balance, "capacity": overflow})

    weights = {"balance": weight, "capacity": weight}
    return fitness_fn, weights


def _gen_p3(scale: str, seed: int, drop_properties: tuple) -> Instance:
    n_cities, n_ports, n_road = (10, 4, 40) if scale == "small" else (100, 8, 300)
    rng = SeededRng(seed, stream=3)

    g = PropertyGraph()
    road_ids = _connected_road_graph(g, rng, n_road, scale_km=400.0)
    mapped = rng.sample(n_road, n_cities + n_ports)
    city_road = [road_ids[i] for i in mapped[:n_cities]]
    port_road = [road_ids[i] for i in mapped[n_cities:]]

    demands = np.array([10.0 + 90.0 * rng.u01() for _ in range(n_cities)])
    shares = np.array([0.2 + rng.u01() for _ in range(n_ports)])
    capacities = shares / shares.sum() * (1.6 * demands.sum())

    city_ids = []
    for i in range(n_cities):
        nid = g.add_node({"City"}, {"name": f"CITY-{i:02d}",
                                    "demand": float(demands[i])})
        g.add_edge(nid, "MAPPED_TO", city_road[i])
        city_ids.append(nid)
    port_ids = []
    for j in range(n_ports):
        nid = g.add_node({"Port"}, {"code": f"PORT-{j}",
                                    "capacity": float(capacities[j])})
        g.add_edge(nid, "MAPPED_TO", port_road[j])
        port_ids.append(nid)
    g.freeze()

    distance = _pairwise_distances(g, port_road, city_road)  # (cities, ports)
    data = {"distance": distance, "demands": demands, "capacities": capacities}
    return _assemble_p3(scale, seed, g, data, disruption=None)


def _assemble_p3(scale, seed, g, data, disruption) -> Instance:
    distance = data["distance"]
    demands = data["demands"]
    capacities = data["capacities"]
    n_cities, n_ports = distance.shape

    d_arrays, d_missing, _ = _materialize_props(
        g, "City", {"demands": "demand"})
    c_arrays, c_missing, _ = _materialize_props(
        g, "Port", {"capacities": "capacity"})
    arrays = {
        "distance_km": tuple(float(v) for v in distance.ravel()),
        "demands": tuple(float(v) for v in demands),
        "capacities": tuple(float(v) for v in capacities),
    }
    missing = {"distance_km": 0, **d_missing, **c_missing}
    provenance = (
        "distance_km: shortest_paths(ports -> cities, length_km, ROAD)",
        f"demands: {_bare_query('City', 'demand')}",
        f"capacities: {_bare_query('Port', 'capacity')}",
    )

    space = continuous_space(np.zeros(n_cities * n_ports),
                             np.ones(n_cities * n_ports))
    weight = PENALTY_SCALE * float(distance.mean())
    fitness_fn, weights = _build_fraction_binding(
        distance, demands, capacities, "transport_cost", weight)
    binding = PatternBBinding(
        space=space, arrays=arrays, fitness_fn=fitness_fn,
        penalty_weights=weights, provenance=provenance,
        missing_counts=missing,
        term_sources={"transport_cost": ("distance_km", "demands"),
                      "balance": ("demands",),
                      "capacity": ("capacities",)})

    spec = {
        "distance_km": [float(v) for v in distance.ravel()],
        "demands": [float(v) for v in demands],
        "capacities": [float(v) for v in capacities],
    }
    if disruption is not None:
        spec["disruption"] = {
            "mode": disruption.mode, "fraction": disruption.fraction,
            "seed": disruption.seed,
            "ports_halved": data["affected"],
        }
    return Instance(
        problem_id="P3", scale=scale, seed=seed, graph=g, binding=binding,
        space=space, spec=spec, oracle_kind="transportation",
        oracle_note=("soft-penalty comparison: the oracle enforces balance "
                     "and capacity exactly while the binding penalizes them"),
        params={"data": data, "penalty_weight": weight},
        disruption=disruption)


# ---------------------------------------------------------------------------
# P4: physician deficit, Pattern B
# ---------------------------------------------------------------------------

def _gen_p4(scale: str, seed: int, drop_properties: tuple) -> Instance:
    n_countries, k = (25, 6) if scale == "small" else (40, 5)
    beta = P4_BETA
    threshold = PHYSICIAN_DENSITY_THRESHOLD
    rng = SeededRng(seed, stream=4)

    # healthy by construction wherever the seed lands: two countries per
    # region sit below the threshold at one shared deficit (smaller than
    # the diversity bonus), the rest sit above.  Densities straddle the
    # threshold and every region stays reachable.
    n_below = 2 * len(WHO_REGIONS)
    shared_deficit = round(6.0 + 3.5 * rng.u01(), 1)
    order = list(range(n_countries))
    rng.shuffle(order)
    densities = [0.0] * n_countries
    regions = [""] * n_countries
    for pos, idx in enumerate(order):
        if pos < n_below:
            densities[idx] = round(threshold - shared_deficit, 1)
            regions[idx] = WHO_REGIONS[pos % len(WHO_REGIONS)]
        else:
            densities[idx] = round(24.0 + 56.0 * rng.u01(), 1)
            regions[idx] = WHO_REGIONS[rng.integer(0, len(WHO_REGIONS))]

    g = PropertyGraph()
    names = [f"COUNTRY-{i:02d}" for i in range(n_countries)]
    for i in range(n_countries):
        props = {"name": names[i], "who_region": regions[i],
                 "physician_density": densities[i]}
        for dropped in drop_properties:
            props.pop(dropped, None)
        g.add_node({"Country"}, props)
    g.freeze()

    arrays, missing, provenance = _materialize_props(
        g, "Country",
        {"densities": "physician_density", "regions": "who_region"})

    space = selection_space(k, n_countries)
    deficits = [max(threshold - v, 0.0) if v is not None else 0.0
                for v in arrays["densities"]]
    codes = _bucket_codes(arrays["regions"])

    def fitness_fn(x, _arrays):
        sel = sorted(decode_selection(x, space))
        deficit = 0.0
        seen = set()
        for i in sel:
            deficit += deficits[i]
            seen.add(codes[i])
        return ({"deficit_coverage": -deficit,
                 "region_diversity": -beta * len(seen)}, {})

    binding = PatternBBinding(
        space=space, arrays=arrays, fitness_fn=fitness_fn,
        provenance=provenance, missing_counts=missing, memoize=True,
        term_sources={"deficit_coverage": ("densities",),
                      "region_diversity": ("regions",)})

    spec = {
        "names": names,
        "regions": [regions[i] if "who_region" not in drop_properties else None
                    for i in range(n_countries)],
        "densities": densities,
        "threshold": int(threshold),
        "k": k,
    }
    return Instance(
        problem_id="P4", scale=scale, seed=seed, graph=g, binding=binding,
        space=space, spec=spec, oracle_kind="brute_force",
        oracle_note="discrete selection; oracle-comparable, gap >= 1",
        params={"beta": beta, "threshold": threshold,
                "drop_properties": drop_properties})


# ---------------------------------------------------------------------------
# P5: dispatch, Pattern B, merit-order oracle in linear mode
# ---------------------------------------------------------------------------

def _gen_p5(scale: str, seed: int, drop_properties: tuple,
            mode: str = "linear") -> Instance:
    n_gen, n_hours = (4, 24) if scale == "small" else (6, 48)
    if mode not in ("linear", "nonlinear"):
        raise ValueError(f"unknown P5 mode {mode!r}")
    rng = SeededRng(seed, stream=5)

    cost_rate = np.array([20.0 + 40.0 * rng.u01() for _ in range(n_gen)])
    emission_rate = np.array([0.3 + 0.9 * rng.u01() for _ in range(n_gen)])
    max_out = np.array([100.0 + 200.0 * rng.u01() for _ in range(n_gen)])
    min_out = 0.08 * max_out
    ramp = 0.25 * max_out

    phase = rng.u01() * 2.0 * math.pi
    raw = np.array([
        0.75 + 0.25 * math.sin(2.0 * math.pi * h / n_hours - phase)
        + 0.05 * rng.u01()
        for h in range(n_hours)])
    lo = 1.25 * float(min_out.sum())
    hi = 0.85 * float(max_out.sum())
    demand = lo + (raw - raw.min()) * (hi - lo) / (raw.max() - raw.min())

    g = PropertyGraph()
    for i in range(n_gen):
        g.add_node({"Generator"}, {
            "name": f"GEN-{i}", "cost_rate": float(cost_rate[i]),
            "emission_rate": float(emission_rate[i]),
            "min_out": float(min_out[i]), "max_out": float(max_out[i]),
            "ramp": float(ramp[i])})
    for h in range(n_hours):
        g.add_node({"Hour"}, {"index": h, "demand": float(demand[h])})
    g.freeze()

    arrays, missing, provenance = _materialize_props(
        g, "Generator",
        {"cost_rate": "cost_rate", "emission_rate": "emission_rate",
         "min_out": "min_out", "max_out": "max_out", "ramp": "ramp"})
    h_arrays, h_missing, h_prov = _materialize_props(
        g, "Hour", {"demand": "demand"}, )
    arrays = {**arrays, **h_arrays}
    missing = {**missing, **h_missing}
    provenance = provenance + h_prov

    space = continuous_space(np.repeat(min_out, n_hours),
                             np.repeat(max_out, n_hours))
    w_e = P5_EMISSION_WEIGHT
    eff = cost_rate + w_e * emission_rate
    weight = PENALTY_SCALE * float(eff.mean())

    def fitness_fn(x, _arrays):
        out = np.asarray(x).reshape(n_gen, n_hours)
        per_gen = out.sum(axis=1)
        cost = float(per_gen.dot(cost_rate))
        if mode == "linear":
            emission = w_e * float(per_gen.dot(emission_rate))
        else:
            # quadratic emissions: output near capacity pollutes
            # disproportionately; no exact reference exists for this mode
            emission = w_e * float(
                (emission_rate[:, None] * out * out / max_out[:, None]).sum())
        balance = float(np.abs(out.sum(axis=0) - demand).sum())
        ramp_over = float(np.maximum(
            np.abs(np.diff(out, axis=1)) - ramp[:, None], 0.0).sum())
        return ({"fuel_cost": cost, "emission_penalty": emission},
                {"balance": balance, "ramp": ramp_over})

    binding = PatternBBinding(
        space=space, arrays=arrays, fitness_fn=fitness_fn,
        penalty_weights={"balance": weight, "ramp": weight},
        provenance=provenance, missing_counts=missing,
        term_sources={"fuel_cost": ("cost_rate",),
                      "emission_penalty": ("emission_rate", "max_out"),
                      "balance": ("demand",),
                      "ramp": ("ramp",)})

    dispatch = DispatchInstance(
        cost_rate=cost_rate, emission_rate=emission_rate, min_out=min_out,
        max_out=max_out, ramp=ramp, demand=demand)

    spec = {
        "n_generators": n_gen,
        "n_hours": n_hours,
        "cost_rate": [float(v) for v in cost_rate],
        "emission_rate": [float(v) for v in emission_rate],
        "min_out": [float(v) for v in min_out],
        "max_out": [float(v) for v in max_out],
        "ramp": [float(v) for v in ramp],
        "demand": [float(v) for v in demand],
        "emission_weight": w_e,
    }
    oracle_kind = "merit_order" if mode == "linear" else None
    note = ("soft-penalty comparison: oracle relaxes ramps and enforces "
            "hourly balance exactly" if mode == "linear"
            else "no oracle (non-linear emission mode)")
    return Instance(
        problem_id="P5", scale=scale, seed=seed, graph=g, binding=binding,
        space=space, spec=spec, oracle_kind=oracle_kind, oracle_note=note,
        params={"mode": mode, "dispatch": dispatch,
                "emission_weight": w_e, "penalty_weight": weight})


# ---------------------------------------------------------------------------
# P6: antibiotic subclasses, Pattern B
# ---------------------------------------------------------------------------

def _gen_p6(scale: str, seed: int, drop_properties: tuple) -> Instance:
    n_sub, n_path, k = (15, 12, 4) if scale == "small" else (25, 20, 5)
    lam = P6_LAMBDA
    rng = SeededRng(seed, stream=6)

    counts = [[rng.integer(0, 7) for _ in range(n_path)] for _ in range(n_sub)]
    burden = [sum(row) for row in counts]
    sub_names = [f"SUBCLASS-{i:02d}" for i in range(n_sub)]
    path_names = [f"PATHOGEN-{i:02d}" for i in range(n_path)]

    g = PropertyGraph()
    for i in range(n_sub):
        g.add_node({"Subclass"}, {"name": sub_names[i],
                                  "resistance_counts": counts[i],
                                  "burden": burden[i]})
    path_ids = [g.add_node({"Pathogen"}, {"name": p}) for p in path_names]
    for i in range(n_sub):
        for j in range(n_path):
            if counts[i][j] > 0:
                g.add_edge(i, "RESISTS", path_ids[j],
                           {"count": counts[i][j]})
    g.freeze()

    arrays, missing, provenance = _materialize_props(
        g, "Subclass",
        {"resistance_counts": "resistance_counts", "burden": "burden"})

    space = selection_space(k, n_sub)
    count_matrix = np.array([list(row) for row in arrays["resistance_counts"]],
                            dtype=np.float64)
    efficacy = 1.0 / (1.0 + count_matrix)
    burden_arr = np.array(arrays["burden"], dtype=np.float64)

    def fitness_fn(x, _arrays):
        sel = sorted(decode_selection(x, space))
        coverage = float(efficacy[sel].max(axis=0).sum())
        load = float(burden_arr[sel].sum())
        return ({"pathogen_coverage": -coverage,
                 "resistance_burden": lam * load}, {})

    binding = PatternBBinding(
        space=space, arrays=arrays, fitness_fn=fitness_fn,
        provenance=provenance, missing_counts=missing, memoize=True,
        term_sources={"pathogen_coverage": ("resistance_counts",),
                      "resistance_burden": ("burden",)})

    spec = {
        "subclasses": sub_names,
        "pathogens": path_names,
        "resistance_counts": [v for row in counts for v in row],
        "burden": burden,
        "k": k,
    }
    return Instance(
        problem_id="P6", scale=scale, seed=seed, graph=g, binding=binding,
        space=space, spec=spec, oracle_kind="brute_force",
        oracle_note="discrete selection; oracle-comparable, gap >= 1",
        params={"lambda": lam, "efficacy": efficacy})


# ---------------------------------------------------------------------------
# P7: evacuation, Pattern B, transportation oracle
# ---------------------------------------------------------------------------

def _gen_p7(scale: str, seed: int, drop_properties: tuple) -> Instance:
    n_cen, n_exit, n_road = (8, 3, 20) if scale == "small" else (20, 5, 80)
    rng = SeededRng(seed, stream=7)

    g = PropertyGraph()
    road_ids = _connected_road_graph(g, rng, n_road, scale_km=30.0)
    mapped = rng.sample(n_road, n_cen + n_exit)
    cen_road = [road_ids[i] for i in mapped[:n_cen]]
    exit_road = [road_ids[i] for i in mapped[n_cen:]]

    pop = np.array([float(200 + rng.integer(0, 1801)) for _ in range(n_cen)])
    shares = np.array([0.3 + rng.u01() for _ in range(n_exit)])
    capacity = shares / shares.sum() * (1.3 * pop.sum())

    for i in range(n_cen):
        nid = g.add_node({"Centroid"}, {"name": f"ZONE-{i:02d}",
                                        "pop": float(pop[i])})
        g.add_edge(nid, "MAPPED_TO", cen_road[i])
    for j in range(n_exit):
        nid = g.add_node({"Exit"}, {"name": f"EXIT-{j}",
                                    "capacity": float(capacity[j])})
        g.add_edge(nid, "MAPPED_TO", exit_road[j])
    g.freeze()

    distance = _pairwise_distances(g, exit_road, cen_road)  # (centroids, exits)
    travel_time = distance / 50.0  # hours on foot-and-vehicle mix
    data = {"travel_time": travel_time, "pop": pop, "capacity": capacity}
    return _assemble_p7(scale, seed, g, data, disruption=None)


def _assemble_p7(scale, seed, g, data, disruption) -> Instance:
    travel_time = data["travel_time"]
    pop = data["pop"]
    capacity = data["capacity"]
    n_cen, n_exit = travel_time.shape

    p_arrays, p_missing, _ = _materialize_props(g, "Centroid", {"pop": "pop"})
    e_arrays, e_missing, _ = _materialize_props(g, "Exit",
                                                {"capacity": "capacity"})
    arrays = {
        "travel_time": tuple(float(v) for v in travel_time.ravel()),
        "pop": tuple(float(v) for v in pop),
        "capacity": tuple(float(v) for v in capacity),
    }
    missing = {"travel_time": 0, **p_missing, **e_missing}
    provenance = (
        "travel_time: shortest_paths(exits -> centroids, length_km, ROAD) / 50",
        f"pop: {_bare_query('Centroid', 'pop')}",
        f"capacity: {_bare_query('Exit', 'capacity')}",
    )

    space = continuous_space(np.zeros(n_cen * n_exit), np.ones(n_cen * n_exit))
    weight = PENALTY_SCALE * float(travel_time.mean())
    fitness_fn, weights = _build_fraction_binding(
        travel_time, pop, capacity, "person_hours", weight)
    binding = PatternBBinding(
        space=space, arrays=arrays, fitness_fn=fitness_fn,
        penalty_weights=weights, provenance=provenance,
        missing_counts=missing,
        term_sources={"person_hours": ("travel_time", "pop"),
                      "balance": ("pop",),
                      "capacity": ("capacity",)})

    spec = {
        "n_centroids": n_cen,
        "n_exits": n_exit,
        "pop": [float(v) for v in pop],
        "capacity": [float(v) for v in capacity],
        "travel_time": [float(v) for v in travel_time.ravel()],
    }
    if disruption is not None:
        spec["disruption"] = {
            "mode": disruption.mode, "fraction": disruption.fraction,
            "factor": disruption.factor, "seed": disruption.seed,
            "routes_inflated": data["affected"],
        }
    return Instance(
        problem_id="P7", scale=scale, seed=seed, graph=g, binding=binding,
        space=space, spec=spec, oracle_kind="transportation",
        oracle_note=("soft-penalty comparison: fitness may dip below the "
                     "oracle cost because balance is penalized, not enforced"),
        params={"data": data, "penalty_weight": weight},
        disruption=disruption)


# ---------------------------------------------------------------------------
# public entry points
# ---------------------------------------------------------------------------

_GENERATORS = {
    "P1": _gen_p1, "P2": _gen_p2, "P3": _gen_p3, "P4": _gen_p4,
    "P5": _gen_p5, "P6": _gen_p6, "P7": _gen_p7,
}


def generate(problem_id: str, scale: str = "small", seed: int = 0, *,
             drop_properties: Iterable[str] = (),
             p5_mode: str = "linear") -> Instance:
    """Build a problem instance; identical inputs give identical bytes.

    drop_properties removes the named node properties at generation
    time (the data-quality degradation the degeneracy detector is for).
    """
    problem_id = problem_id.upper()
    if problem_id not in _GENERATORS:
        raise ValueError(f"unknown problem id {problem_id!r}")
    if scale not in SCALES:
        raise ValueError(f"unknown scale {scale!r}")
    drop = tuple(drop_properties)
    if problem_id == "P5":
        return _gen_p5(scale, seed, drop, mode=p5_mode)
    return _GENERATORS[problem_id](scale, seed, drop)


def fresh_binding(instance: Instance):
    """Counter-clean binding over the same shared graph/arrays.

    Bench cells each own a binding (and its memo table) while the
    underlying graph and materialized arrays stay shared read-only.
    """
    b = instance.binding
    if isinstance(b, PatternABinding):
        return dataclasses.replace(b, evaluations=0, memo_hits=0,
                                   query_executions=0)
    return dataclasses.replace(b, evaluations=0, memo_hits=0)


def inject_disruption(instance: Instance, dspec: DisruptionSpec) -> Instance:
    """Apply a seeded disruption, rebuilding binding/spec/oracle data.

    A fraction affecting zero entities is a no-op: the instance comes
    back unchanged, with no disruption record.
    """
    if dspec.mode == "capacity_halving":
        if instance.problem_id != "P3":
            raise ValueError("capacity_halving applies to P3 only")
        data = dict(instance.params["data"])
        affected = disruption_targets(data["capacities"].size,
                                      dspec.fraction, dspec.seed)
        if not affected:
            return instance
        capacities = data["capacities"].copy()
        capacities[affected] *= 0.5
        data["capacities"] = capacities
        data["affected"] = affected
        return _assemble_p3(instance.scale, instance.seed, instance.graph,
                            data, dspec)

    if instance.problem_id != "P7":
        raise ValueError("time_inflation applies to P7 only")
    data = dict(instance.params["data"])
    flat = data["travel_time"].copy().ravel()
    affected = disruption_targets(flat.size, dspec.fraction, dspec.seed)
    if not affected:
        return instance
    flat[affected] *= dspec.factor
    data["travel_time"] = flat.reshape(data["travel_time"].shape)
    data["affected"] = affected
    return _assemble_p7(instance.scale, instance.seed, instance.graph,
                        data, dspec)


@dataclass(frozen=True)
class OracleResult:
    kind: str
    optimum: float
    note: str
    solution: object = None


def solve_oracle(instance: Instance) -> Optional[OracleResult]:
    """Exact reference optimum for this instance, or None."""
    kind = instance.oracle_kind
    if kind is None:
        return None
    if kind == "brute_force":
        # fresh regeneration keeps the bench binding's counters clean;
        # the sweep visits each subset once, so caching would only burn memory
        fresh = generate(instance.problem_id, instance.scale, instance.seed)
        fresh.binding.memoize = False
        subset, fit = brute_force_selection(fresh.binding, fresh.space)
        return OracleResult(kind, fit.total, instance.oracle_note, subset)
    if kind == "transportation":
        data = instance.params["data"]
        if instance.problem_id == "P3":
            ti = TransportationInstance(cost=data["distance"],
                                        supply=data["demands"],
                                        capacity=data["capacities"])
        else:
            ti = TransportationInstance(cost=data["travel_time"],
                                        supply=data["pop"],
                                        capacity=data["capacity"])
        flow, cost = solve_transportation(ti)
        return OracleResult(kind, cost, instance.oracle_note, flow)
    if kind == "merit_order":
        dispatch = instance.params["dispatch"]
        schedule, cost = merit_order_dispatch(
            dispatch, instance.params["emission_weight"])
        return OracleResult(kind, cost, instance.oracle_note, schedule)
    raise ValueError(f"unknown oracle kind {kind!r}")


def gap_ratio(best_total: float, oracle_total: float) -> Optional[float]:
    """Oracle-relative gap, 1.0 = hit.  For negative totals (negated
    maximization problems) the ratio flips so that worse stays >= 1."""
    if oracle_total == 0:
        return None
    if oracle_total > 0:
        return best_total / oracle_total
    return oracle_total / best_total


# ---------------------------------------------------------------------------
# degeneracy detection
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TermStats:
    name: str
    kind: str          # 'objective' | 'violation'
    minimum: float
    maximum: float
    variance: float
    missing_property_count: int
    flagged: bool      # constant across every sample


@dataclass(frozen=True)
class DegeneracyReport:
    problem_id: str
    samples: int
    terms: tuple[TermStats, ...]

    @property
    def flagged_terms(self) -> tuple[str, ...]:
        return tuple(t.name for t in self.terms if t.flagged)


def detect_degenerate_terms(instance: Instance, samples: int = 200,
                            seed: int = 0) -> DegeneracyReport:
    """Evaluate random in-bounds vectors and flag constant fitness terms.

    A term whose value never moves across the sample (max == min) is
    degenerate: it cannot steer the search, typically because the
    property feeding it is missing and every candidate collapses into
    the same bucket.
    """
    if samples < 2:
        raise ValueError("need at least 2 samples")
    rng = SeededRng(seed, stream=2001)
    space = instance.space
    span = space.upper - space.lower
    values: dict[str, list[float]] = {}
    kinds: dict[str, str] = {}
    for _ in range(samples):
        x = space.lower + span * np.array([rng.u01() for _ in range(space.dim)])
        fit = instance.binding.evaluate(x)
        for name, v in fit.objective_terms.items():
            values.setdefault(name, []).append(float(v))
            kinds[name] = "objective"
        for name, v in fit.violation_terms.items():
            values.setdefault(name, []).append(float(v))
            kinds[name] = "violation"

    missing = _term_missing_counts(instance)
    terms = []
    for name, series in values.items():
        arr = np.asarray(series)
        terms.append(TermStats(
            name=name, kind=kinds[name],
            minimum=float(arr.min()), maximum=float(arr.max()),
            variance=float(arr.var()),
            missing_property_count=missing.get(name, 0),
            flagged=bool(arr.max() == arr.min())))
    return DegeneracyReport(problem_id=instance.problem_id, samples=samples,
                            terms=tuple(terms))


def _term_missing_counts(instance: Instance) -> dict[str, int]:
    binding = instance.binding
    if isinstance(binding, PatternABinding):
        return dict(binding.missing_counts)
    sources = getattr(binding, "term_sources", {}) or {}
    counts = getattr(binding, "missing_counts", {}) or {}
    return {term: sum(counts.get(a, 0) for a in arrays)
            for term, arrays in sources.items()}

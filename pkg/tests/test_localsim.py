"""Light-cone evaluation agrees with the full statevector route."""

from __future__ import annotations

import numpy as np
import pytest

from qaoalab.errors import CapacityError
from qaoalab.localsim import (
    LocalEvaluator,
    all_neighborhoods,
    average_cost_per_edge,
    edge_neighborhood,
    local_expectation,
    tree_fraction,
)
from qaoalab.problems import (
    BitString,
    CostFunction,
    MAXCUT,
    SK,
    complete_graph,
    cycle_graph,
    generate_regular_graph,
    random_sk_couplings,
)
from qaoalab.statevector import QaoaParams, WARMSTART, expectation, qaoa_state


def _random_spins(rng, n):
    return BitString.spins(rng.choice([-1, 1], size=n))


def _random_warm_params(rng, p):
    num = round(2 * p)
    flat = np.where(np.arange(num) % 2 == 0,
                    rng.uniform(0, np.pi, size=num),
                    rng.uniform(0, 2 * np.pi, size=num))
    return QaoaParams.from_flat(WARMSTART, flat)


def test_agreement_with_statevector_cubic():
    rng = np.random.default_rng(101)
    for trial in range(8):
        g = generate_regular_graph(12, 3, seed=trial)
        cost = CostFunction(MAXCUT, g)
        w = _random_spins(rng, 12)
        for p in (0.5, 1.5, 2.5):
            params = _random_warm_params(rng, p)
            loc = local_expectation(g, cost, w, params)
            ref = expectation(qaoa_state(cost, params, start=w), cost)
            assert abs(loc - ref) < 1e-9


def test_agreement_on_cyclic_neighborhoods():
    # K4 and short cycles force non-tree light cones; the evaluation must
    # stay exact there, not just on trees.
    rng = np.random.default_rng(55)
    for g in (complete_graph(4), cycle_graph(5), cycle_graph(6)):
        cost = CostFunction(MAXCUT, g)
        for _ in range(4):
            w = _random_spins(rng, g.n)
            params = _random_warm_params(rng, 1.5)
            loc = local_expectation(g, cost, w, params)
            ref = expectation(qaoa_state(cost, params, start=w), cost)
            assert abs(loc - ref) < 1e-9


def test_agreement_on_sk_cost():
    rng = np.random.default_rng(77)
    for trial in range(4):
        g = complete_graph(6, random_sk_couplings(6, seed=trial))
        cost = CostFunction(SK, g)
        w = _random_spins(rng, 6)
        params = _random_warm_params(rng, 1.5)
        loc = local_expectation(g, cost, w, params)
        ref = expectation(qaoa_state(cost, params, start=w), cost)
        assert abs(loc - ref) < 1e-9


def test_zero_angles_return_start_cost():
    rng = np.random.default_rng(21)
    for trial in range(6):
        g = generate_regular_graph(14, 3, seed=trial)
        cost = CostFunction(MAXCUT, g)
        w = _random_spins(rng, 14)
        params = QaoaParams.from_flat(WARMSTART, [0.0] * 5)
        assert abs(local_expectation(g, cost, w, params) - cost.value(w)) < 1e-12


def test_evaluator_matches_function_route():
    rng = np.random.default_rng(33)
    g = generate_regular_graph(16, 3, seed=9)
    cost = CostFunction(MAXCUT, g)
    w = _random_spins(rng, 16)
    ev = LocalEvaluator(g, cost, w, 1.5)
    for _ in range(5):
        flat = rng.uniform(0, np.pi, size=3)
        ref = local_expectation(g, cost, w, QaoaParams.from_flat(WARMSTART, flat))
        assert abs(ev(flat) - ref) < 1e-12


def test_neighborhood_layout():
    nb = edge_neighborhood(cycle_graph(10), 0, 2)
    # roots sit at positions 0/1, then levels grow outward
    assert list(nb.vertices[:2]) == [0, 1]
    assert list(nb.levels) == [0, 0, 1, 1, 2, 2]
    assert nb.parent_pos[0] == -1 and nb.parent_pos[1] == -1
    assert nb.is_tree
    assert len(all_neighborhoods(cycle_graph(10), 2)) == 10


def test_tree_fraction_frozen_cases():
    assert tree_fraction(cycle_graph(10), 2) == 1.0
    assert tree_fraction(cycle_graph(6), 2) == 0.0  # ball wraps the cycle
    assert tree_fraction(complete_graph(4), 1) == 0.0
    g = generate_regular_graph(14, 3, seed=0)
    frac = tree_fraction(g, 1)
    assert 0.0 <= frac <= 1.0


def test_capacity_error_on_wide_neighborhoods():
    g = generate_regular_graph(40, 5, seed=0)
    cost = CostFunction(MAXCUT, g)
    w = BitString.spins(np.ones(40, dtype=np.int64))
    params = QaoaParams.from_flat(WARMSTART, [0.1] * 5)
    with pytest.raises(CapacityError):
        local_expectation(g, cost, w, params)


def test_average_cost_per_edge():
    g = generate_regular_graph(10, 3, seed=2)
    assert average_cost_per_edge(CostFunction(MAXCUT, g)) == 0.5
    sk = complete_graph(6, random_sk_couplings(6, seed=3))
    assert average_cost_per_edge(CostFunction(SK, sk)) == 0.0

"""Local ensembles, thermality, closed forms, and counting bounds."""

from __future__ import annotations

import math

import mpmath
import numpy as np
import pytest

from qaoalab.analysis import (
    CompressionInputs,
    NeighborhoodDistribution,
    compression_epsilon,
    decoupled_oracle,
    fit_power_law,
    improvable_count_bound,
    local_ensemble,
    magic_angle_state,
    mis_p_half,
    sample_deviation,
    small_angle_condition,
    thermal_bound,
    thermal_tree_ensemble_exact,
    thermality_coefficient,
)
from qaoalab.errors import ConventionError, GraphFormatError
from qaoalab.localsim import tree_fraction
from qaoalab.problems import (
    BitString,
    CostFunction,
    Graph,
    ISING,
    MAXCUT,
    MIS,
    SK,
    complete_graph,
    cycle_graph,
    decoupled_graph,
    generate_regular_graph,
    random_sk_couplings,
)
from qaoalab.statevector import QaoaParams, WARMSTART, expectation, qaoa_state
from qaoalab.warmstart import calibrate_beta, exact_boltzmann_sample


def _random_spins(rng, n):
    return BitString.spins(rng.choice([-1, 1], size=n))


def _all_spins(n):
    idx = np.arange(1 << n)[:, None]
    bits = (idx >> (n - 1 - np.arange(n))) & 1
    return 1 - 2 * bits


# ----------------------------------------------------------------------
# local ensembles and thermality
# ----------------------------------------------------------------------

def test_constant_string_gives_point_mass():
    g = generate_regular_graph(10, 3, seed=0)
    dist = local_ensemble(g, BitString.spins(np.ones(10, dtype=np.int64)), 1)
    assert dist.probs[0] == 1.0 and dist.probs[1:].sum() == 0.0


def test_alternating_cycle_weights_exact():
    # the wrap edge orients like the even-start edges, so the two local
    # configurations carry (n/2 + 1)/n and (n/2 - 1)/n — equal only as
    # n -> infinity
    for n in (10, 14):
        w = BitString.spins([1 if i % 2 == 0 else -1 for i in range(n)])
        dist = local_ensemble(cycle_graph(n), w, 1)
        sup = dist.support()
        assert len(sup) == 2
        probs = sorted(p for _, p in sup)
        assert abs(probs[0] - (n / 2 - 1) / n) < 1e-15
        assert abs(probs[1] - (n / 2 + 1) / n) < 1e-15


def test_distribution_validation_and_distance():
    ok = NeighborhoodDistribution(np.array([0.25] * 4), 1, 2)
    assert ok.l1_distance(ok) == 0.0
    a = NeighborhoodDistribution(np.array([1.0, 0.0, 0.0, 0.0]), 1, 2)
    b = NeighborhoodDistribution(np.array([0.0, 1.0, 0.0, 0.0]), 1, 2)
    assert a.l1_distance(b) == 2.0
    assert a.l1_distance(b) == b.l1_distance(a)
    with pytest.raises(ValueError):
        NeighborhoodDistribution(np.array([0.5, 0.6]), 1, 1)
    with pytest.raises(ValueError):
        NeighborhoodDistribution(np.array([-0.1, 1.1]), 1, 1)
    with pytest.raises(ValueError):
        NeighborhoodDistribution(np.array([0.5, 0.5, 0.0]), 1, 1)
    c = NeighborhoodDistribution(np.array([0.25] * 4), 2, 2)
    with pytest.raises(ValueError):
        ok.l1_distance(c)


def test_thermal_ensemble_identity():
    # Boltzmann-averaging the per-string ensembles reproduces the thermal
    # ensemble; the left side is rebuilt here with an explicit string loop
    g = generate_regular_graph(10, 3, seed=0)
    cost = CostFunction(MAXCUT, g)
    table = cost.cost_table().astype(np.float64)
    for beta in (0.0, 0.6, 1.4):
        wgt = np.exp(beta * (table - table.max()))
        probs = wgt / wgt.sum()
        spins = _all_spins(10)
        avg = None
        for idx in range(1 << 10):
            d = local_ensemble(g, BitString.spins(spins[idx]), 1)
            avg = probs[idx] * d.probs if avg is None else avg + probs[idx] * d.probs
        ref = thermal_tree_ensemble_exact(g, beta, 1)
        assert np.max(np.abs(avg - ref.probs)) < 1e-12


def test_thermal_ensemble_uniform_at_zero_beta():
    g = generate_regular_graph(12, 3, seed=1)
    dist = thermal_tree_ensemble_exact(g, 0.0, 1)
    assert np.max(np.abs(dist.probs - 1.0 / len(dist.probs))) < 1e-15


def test_thermality_coefficient_range_and_bound():
    g = generate_regular_graph(12, 3, seed=2)
    cost = CostFunction(MAXCUT, g)
    strings = exact_boltzmann_sample(g, cost, 0.9, seed=5, count=8)
    checked = 0
    for w in strings:
        try:
            eps = thermality_coefficient(g, w, 1)
        except ValueError:
            continue  # cut below the uniform mean is not calibratable
        checked += 1
        assert 0.0 <= eps <= 2.0
        bound = thermal_bound(g, w, 1)
        delta = 1.0 - tree_fraction(g, 1)
        ref = cost.value(w) / g.m + 2 * eps + 4 * delta
        assert abs(bound - ref) < 1e-12
        assert bound >= cost.value(w) / g.m
    assert checked >= 4


def test_thermality_requires_reachable_calibration():
    g = generate_regular_graph(12, 3, seed=2)
    low = BitString.spins(np.ones(12, dtype=np.int64))  # zero cut
    with pytest.raises(ValueError):
        thermality_coefficient(g, low, 1)


def test_no_tree_neighborhoods_is_an_error():
    with pytest.raises(GraphFormatError):
        thermal_tree_ensemble_exact(cycle_graph(6), 0.5, 2)


def test_sample_deviation_two_string_halving():
    g = generate_regular_graph(14, 3, seed=3)
    rng = np.random.default_rng(8)
    w1, w2 = _random_spins(rng, 14), _random_spins(rng, 14)
    d = local_ensemble(g, w1, 1).l1_distance(local_ensemble(g, w2, 1))
    e = sample_deviation([w1, w2], g, 1)
    assert abs(e - d / 2) < 1e-14
    assert sample_deviation([w1, w1, w1], g, 1) == 0.0
    with pytest.raises(ValueError):
        sample_deviation([w1], g, 1)


def test_fit_power_law_recovers_synthetic_slope():
    ns = np.array([100.0, 400.0, 1600.0, 6400.0])
    for slope, c in ((-0.5, 3.0), (-0.4, 1.7)):
        fit = fit_power_law(ns, c * ns ** slope)
        assert abs(fit.free_slope - slope) < 1e-12
        assert abs(fit.free_amplitude - c) < 1e-9
        if slope == -0.5:
            assert abs(fit.amplitude - c) < 1e-12
    with pytest.raises(ValueError):
        fit_power_law([100.0], [1.0])
    with pytest.raises(ValueError):
        fit_power_law([100.0, 200.0], [1.0, -1.0])


# ----------------------------------------------------------------------
# small angles
# ----------------------------------------------------------------------

def test_small_angle_condition_bipartite_extremes():
    # K_{3,3}: the all-equal string has every delta_i = +3 (cubed sum
    # positive), the perfect cut has every delta_i = -3
    k33 = Graph(6, [(i, 3 + j) for i in range(3) for j in range(3)])
    same = small_angle_condition(k33, BitString.spins(np.ones(6, dtype=np.int64)))
    assert same.s1 == 0 and same.s3cube == 6 * 27 and same.condition
    cut = small_angle_condition(
        k33, BitString.spins(np.array([1, 1, 1, -1, -1, -1])))
    assert cut.s1 == 0 and cut.s3cube == -6 * 27 and not cut.condition


def test_small_angle_condition_requires_cubic():
    with pytest.raises(GraphFormatError):
        small_angle_condition(cycle_graph(6), BitString.spins(np.ones(6, dtype=np.int64)))


def test_small_angle_condition_matches_box_search():
    from qaoalab.optimizer import IMPROVEMENT_TOL, small_beta_optimize

    rng = np.random.default_rng(44)
    agreements = 0
    for trial in range(3):
        g = generate_regular_graph(12, 3, seed=trial + 50)
        cz = CostFunction(ISING, g)
        for _ in range(6):
            w = _random_spins(rng, 12)
            report = small_angle_condition(g, w)
            gain = small_beta_optimize(g, cz, w) - cz.value(w)
            assert (gain > IMPROVEMENT_TOL) == report.condition
            agreements += 1
    assert agreements == 18


# ----------------------------------------------------------------------
# magic angle
# ----------------------------------------------------------------------

def test_magic_angle_cat_support_and_flip_rule():
    rng = np.random.default_rng(60)
    for trial in range(10):
        n = int(rng.choice([6, 8, 10]))
        J = random_sk_couplings(n, seed=trial)
        g = complete_graph(n, J)
        cost = CostFunction(SK, g)
        w = _random_spins(rng, n)
        res = magic_angle_state(cost, w)
        assert res.cat
        assert abs(res.probabilities[0] - 0.5) < 1e-9
        assert abs(res.probabilities[1] - 0.5) < 1e-9
        assert abs(res.leak) < 1e-9
        # independent flip rule: bit i toggles iff prod_j J_ij < 0
        prod = np.ones(n)
        for k, (u, v) in enumerate(g.edges):
            prod[u] *= g.J[k]
            prod[v] *= g.J[k]
        expect_bits = w.as_bits() ^ (prod < 0)
        assert np.array_equal(res.wprime.as_bits(), expect_bits)


def test_magic_angle_all_positive_couplings_fix_w():
    n = 6
    g = complete_graph(n, np.ones(n * (n - 1) // 2, dtype=np.int64))
    cost = CostFunction(SK, g)
    w = BitString.spins(np.array([1, -1, 1, 1, -1, 1]))
    res = magic_angle_state(cost, w)
    assert res.wprime.to_line() == w.to_line()


def test_magic_angle_single_coupling_flip_toggles_two_bits():
    n = 6
    J = np.ones(n * (n - 1) // 2, dtype=np.int64)
    g = complete_graph(n, J)
    w = BitString.spins(np.ones(n, dtype=np.int64))
    base = magic_angle_state(CostFunction(SK, g), w).wprime.as_bits()
    J2 = J.copy()
    edges = complete_graph(n).edges
    k = next(i for i, (u, v) in enumerate(edges) if (u, v) == (1, 4))
    J2[k] = -1
    flipped = magic_angle_state(
        CostFunction(SK, complete_graph(n, J2)), w).wprime.as_bits()
    diff = np.flatnonzero(base != flipped)
    assert list(diff) == [1, 4]


def test_magic_angle_input_validation():
    J5 = random_sk_couplings(5, seed=0)
    with pytest.raises(ValueError):
        magic_angle_state(CostFunction(SK, complete_graph(5, J5)),
                          BitString.spins(np.ones(5, dtype=np.int64)))
    with pytest.raises(ConventionError):
        magic_angle_state(CostFunction(MAXCUT, generate_regular_graph(6, 3, seed=0)),
                          BitString.spins(np.ones(6, dtype=np.int64)))
    # the graph type itself rejects non-unit couplings
    with pytest.raises(ValueError):
        complete_graph(6, 0.5 * np.ones(15))
    # non-complete graph with unit couplings reaches the shape check
    ring = Graph(6, [(i, (i + 1) % 6) for i in range(6)],
                 couplings=np.ones(6, dtype=np.int64))
    with pytest.raises(GraphFormatError):
        magic_angle_state(CostFunction(SK, ring),
                          BitString.spins(np.ones(6, dtype=np.int64)))


# ----------------------------------------------------------------------
# counting bounds
# ----------------------------------------------------------------------

def test_compression_against_extended_precision():
    mpmath.mp.dps = 60
    cases = [
        CompressionInputs(d0=1000, d1=10, p=1.5, n=300),
        CompressionInputs(d0=10 ** 9, d1=1, p=0.5, n=1000),
        CompressionInputs(d0=5000, d1=250, p=2.5, n=64),
    ]
    for c in cases:
        got = compression_epsilon(c)
        ratio = mpmath.mpf(2) * c.d1 / c.d0
        scale = 16 * mpmath.pi * mpmath.mpf(c.p) * mpmath.mpf(c.n) ** 2
        ref = ratio ** (mpmath.mpf(1) / (2 * c.p + 2)) * scale ** (
            mpmath.mpf(c.p) / (c.p + 1))
        assert abs(got - float(ref)) <= 1e-12 * float(ref)
    for d1, delta, p, n in ((10, 0.5, 1.5, 300), (3, 0.01, 0.5, 64)):
        got = improvable_count_bound(d1, delta, p, n)
        scale = 16 * mpmath.pi * mpmath.mpf(p) * mpmath.mpf(n) ** 2 / mpmath.mpf(delta)
        ref = (2 * mpmath.mpf(d1) / delta) * scale ** (2 * mpmath.mpf(p))
        assert abs(got - float(ref)) <= 1e-12 * float(ref)


def test_compression_edge_cases_and_monotonicity():
    zero = CompressionInputs(d0=100, d1=0, p=1.5, n=50)
    assert compression_epsilon(zero) == 0.0
    assert improvable_count_bound(0, 0.5, 1.5, 50) == 0.0
    lo = compression_epsilon(CompressionInputs(d0=10 ** 8, d1=1, p=0.5, n=10))
    hi = compression_epsilon(CompressionInputs(d0=10 ** 8, d1=100, p=0.5, n=10))
    assert hi > lo
    big_n = compression_epsilon(CompressionInputs(d0=10 ** 8, d1=1, p=0.5, n=100))
    assert big_n > lo
    with pytest.raises(ValueError):
        CompressionInputs(d0=0, d1=1, p=1.5, n=10)
    with pytest.raises(ValueError):
        CompressionInputs(d0=10, d1=1, p=0.0, n=10)
    with pytest.raises(ValueError):
        CompressionInputs(d0=10, d1=1, p=1.5, n=10, delta=1.5)
    with pytest.raises(ValueError):
        improvable_count_bound(1, 0.0, 1.5, 10)


# ----------------------------------------------------------------------
# decoupled-problem oracle
# ----------------------------------------------------------------------

def test_decoupled_oracle_matches_statevector():
    # the basis-start circuit factorizes per edge: every unsatisfied edge
    # reaches (1/2) sin^2(theta) and every satisfied edge 1 - (1/2) sin^2(theta)
    g = decoupled_graph(3)
    cost = CostFunction(MAXCUT, g)
    w = BitString.spins(np.array([1, 1, 1, -1, -1, -1]))  # unsat, sat, unsat
    rng = np.random.default_rng(71)
    for _ in range(6):
        flat = [rng.uniform(0, np.pi), rng.uniform(0, 2 * np.pi), rng.uniform(0, np.pi)]
        psi = qaoa_state(cost, QaoaParams.from_flat(WARMSTART, flat), start=w)
        per_edge = []
        for e in g.edges:
            single = CostFunction(MAXCUT, Graph(g.n, [e]))
            per_edge.append(expectation(psi, single))
        assert abs(per_edge[0] - per_edge[2]) < 1e-12
        assert abs(per_edge[1] - (1.0 - per_edge[0])) < 1e-12
        s = min(max(per_edge[0], 0.0), 0.5)
        theta = math.asin(math.sqrt(2 * s))
        vals = decoupled_oracle([0, 1, 0], theta)
        assert np.max(np.abs(vals - np.array(per_edge))) < 1e-12


def test_decoupled_oracle_validates_entries():
    with pytest.raises(ValueError):
        decoupled_oracle([0, 2, 1], 0.3)


# ----------------------------------------------------------------------
# MIS at p = 1/2
# ----------------------------------------------------------------------

def test_mis_p_half_against_statevector():
    from qaoalab.warmstart import greedy_mis

    for seed in (0, 1, 2):
        g = generate_regular_graph(10, 3, seed=seed)
        cost = CostFunction(MIS, g)
        w = greedy_mis(g, seed=seed)
        W = int(w.as_bits().sum())
        for beta in np.linspace(0.0, math.pi / 2, 5):
            psi = qaoa_state(cost, QaoaParams.from_flat(WARMSTART, [beta]), start=w)
            rep = mis_p_half(10, 3, W, 0, beta1=float(beta))
            assert abs(expectation(psi, cost) - rep.value) < 1e-9


def test_mis_p_half_frozen_cases():
    # empty set: optimum x = 1/d, value n/(2d)
    rep = mis_p_half(12, 3, 0, 0)
    assert rep.improvable
    assert abs(rep.optimal_sin2 - 1.0 / 3.0) < 1e-12
    assert abs(rep.optimal_value - 2.0) < 1e-12
    # improvement is possible only below W = n/(d+2)
    assert mis_p_half(12, 3, 2, 0).improvable
    assert not mis_p_half(12, 3, 3, 0).improvable  # also the a == 0 scan path
    assert not mis_p_half(12, 3, 4, 0).improvable
    at_zero = mis_p_half(12, 3, 3, 1, beta1=0.0)
    assert at_zero.value == 2.0  # W - K at beta1 = 0

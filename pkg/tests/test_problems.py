"""Graphs, strings, cost functions, and their enumeration/IO contracts."""

from __future__ import annotations

import itertools
import math

import numpy as np
import pytest

from qaoalab.errors import CapacityError, ConventionError, GraphFormatError
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
    density_of_states,
    flip_deltas,
    generate_regular_graph,
    prune_to_independent_set,
    random_sk_couplings,
    read_graph,
    read_strings,
    write_graph,
    write_strings,
)


def _brute_cut(graph, spins):
    # plain-loop reference, independent of the vectorized cost table
    return sum(1 for u, v in graph.edges if spins[u] != spins[v])


def _random_spins(rng, n):
    return BitString.spins(rng.choice([-1, 1], size=n))


def test_bitstring_conventions_and_index():
    w = BitString.bits([1, 0, 1, 1])
    assert w.n == 4
    assert w.to_index() == 0b1011  # bit 0 is the most significant
    assert w.complement().to_index() == 0b0100
    s = BitString.spins([-1, 1, -1, -1])
    assert np.array_equal(s.as_bits(), [1, 0, 1, 1])
    assert s.to_index() == w.to_index()
    with pytest.raises(ConventionError):
        BitString.bits([0, 2])
    with pytest.raises(ConventionError):
        BitString.spins([1, 0])


def test_graph_validation():
    with pytest.raises(ValueError):
        Graph(4, [(0, 0)])
    with pytest.raises(ValueError):
        Graph(4, [(0, 1), (1, 0)])
    with pytest.raises(ValueError):
        Graph(3, [(0, 5)])
    g = Graph(4, [(2, 1), (0, 3)])
    assert g.m == 2


def test_generators_shapes():
    g = cycle_graph(6)
    assert g.n == 6 and g.m == 6
    k = complete_graph(5)
    assert k.m == 10
    d = decoupled_graph(4)
    assert d.n == 8 and d.m == 4
    degs = np.zeros(8, dtype=int)
    for u, v in d.edges:
        degs[u] += 1
        degs[v] += 1
    assert np.all(degs == 1)
    with pytest.raises(ValueError):
        generate_regular_graph(7, 3, seed=0)


def test_regular_generator_is_regular_and_seeded():
    for seed in range(5):
        g = generate_regular_graph(14, 3, seed=seed)
        degs = np.zeros(14, dtype=int)
        for u, v in g.edges:
            assert u != v
            degs[u] += 1
            degs[v] += 1
        assert np.all(degs == 3)
    a = generate_regular_graph(20, 3, seed=7)
    b = generate_regular_graph(20, 3, seed=7)
    assert a.serialize() == b.serialize()
    c = generate_regular_graph(20, 3, seed=8)
    assert c.serialize() != a.serialize()


def test_maxcut_value_against_loop_reference():
    rng = np.random.default_rng(11)
    for _ in range(30):
        g = generate_regular_graph(10, 3, seed=int(rng.integers(1 << 30)))
        cost = CostFunction(MAXCUT, g)
        w = _random_spins(rng, 10)
        assert cost.value(w) == _brute_cut(g, w.values)


def test_ising_is_shifted_cut():
    # C_Z = -sum z_u z_v = 2 cut - m
    rng = np.random.default_rng(3)
    g = generate_regular_graph(12, 3, seed=5)
    cut = CostFunction(MAXCUT, g)
    cz = CostFunction(ISING, g)
    for _ in range(20):
        w = _random_spins(rng, 12)
        assert cz.value(w) == 2 * cut.value(w) - g.m


def test_mis_value_counts_vertices_minus_violations():
    g = cycle_graph(5)
    cost = CostFunction(MIS, g)
    w = BitString.bits([1, 0, 1, 0, 0])
    assert cost.value(w) == 2
    both = BitString.bits([1, 1, 0, 1, 0])  # edge (0,1) violated
    assert cost.value(both) == 3 - 1
    assert cost.value(BitString.bits([1] * 5)) == 5 - 5


def test_sk_value_against_loop_reference():
    rng = np.random.default_rng(23)
    for trial in range(10):
        J = random_sk_couplings(6, seed=trial)
        g = complete_graph(6, J)
        cost = CostFunction(SK, g)
        w = _random_spins(rng, 6)
        ref = sum(
            int(g.J[k]) * w.values[u] * w.values[v]
            for k, (u, v) in enumerate(g.edges)
        )
        assert cost.value(w) == ref


def test_sk_needs_couplings():
    with pytest.raises(ValueError):
        CostFunction(SK, complete_graph(4))


def test_cost_conventions_enforced():
    g = cycle_graph(4)
    with pytest.raises(ConventionError):
        CostFunction(MAXCUT, g).value(BitString.bits([0, 1, 0, 1]))
    with pytest.raises(ConventionError):
        CostFunction(MIS, g).value(BitString.spins([1, -1, 1, -1]))
    with pytest.raises(ValueError):
        CostFunction(MAXCUT, g).value(BitString.spins([1, -1]))


def test_cost_table_indexing_and_cap():
    g = generate_regular_graph(8, 3, seed=2)
    cost = CostFunction(MAXCUT, g)
    table = cost.cost_table()
    rng = np.random.default_rng(0)
    for _ in range(12):
        w = _random_spins(rng, 8)
        assert table[w.to_index()] == cost.value(w)
    with pytest.raises(CapacityError):
        CostFunction(MAXCUT, decoupled_graph(13)).cost_table()


def test_density_of_states_k4_frozen():
    dos = density_of_states(CostFunction(MAXCUT, complete_graph(4)))
    assert dos == {0: 2, 3: 8, 4: 6}


def test_density_of_states_cycle_against_enumeration():
    g = cycle_graph(6)
    ref: dict = {}
    for bits in itertools.product((1, -1), repeat=6):
        c = _brute_cut(g, np.asarray(bits))
        ref[c] = ref.get(c, 0) + 1
    assert density_of_states(CostFunction(MAXCUT, g)) == ref


def test_density_of_states_decoupled_binomial():
    m = 6
    dos = density_of_states(CostFunction(MAXCUT, decoupled_graph(m)))
    assert dos == {k: math.comb(m, k) * 2 ** m for k in range(m + 1)}


def test_flip_deltas_definition_and_sum():
    # delta_i = sum_{j ~ i} z_i z_j  (half the Ising cost change of a flip);
    # summing over i double counts every edge, so sum_i delta_i = -2 C_Z(w).
    rng = np.random.default_rng(41)
    for _ in range(25):
        g = generate_regular_graph(10, 3, seed=int(rng.integers(1 << 30)))
        w = _random_spins(rng, 10)
        deltas = flip_deltas(g, w)
        cz = CostFunction(ISING, g)
        for i in range(10):
            flipped = w.values.copy()
            flipped[i] = -flipped[i]
            ref = (cz.value(BitString.spins(flipped)) - cz.value(w)) // 2
            assert deltas[i] == ref
        assert deltas.sum() == -2 * cz.value(w)
    with pytest.raises(ConventionError):
        flip_deltas(cycle_graph(4), BitString.bits([0, 1, 0, 1]))


def test_prune_to_independent_set():
    rng = np.random.default_rng(17)
    for _ in range(10):
        g = generate_regular_graph(12, 3, seed=int(rng.integers(1 << 30)))
        raw = BitString.bits(rng.integers(0, 2, size=12))
        pruned = prune_to_independent_set(g, raw)
        sel = pruned.as_bits()
        assert np.all(sel <= raw.as_bits())
        for u, v in g.edges:
            assert not (sel[u] and sel[v])


def test_graph_io_roundtrip(tmp_path):
    g = generate_regular_graph(10, 3, seed=4)
    path = tmp_path / "g.txt"
    write_graph(g, path)
    assert read_graph(path).serialize() == g.serialize()
    sk = complete_graph(5, random_sk_couplings(5, seed=1))
    skp = tmp_path / "sk.txt"
    write_graph(sk, skp)
    back = read_graph(skp)
    assert back.serialize() == sk.serialize()
    assert np.array_equal(back.J, sk.J)


def test_strings_io_roundtrip(tmp_path):
    spins = [BitString.spins([1, -1, 1, -1]), BitString.spins([-1, -1, 1, 1])]
    path = tmp_path / "w.txt"
    write_strings(spins, path, meta={"note": "two strings"})
    back, meta = read_strings(path)
    assert [b.to_line() for b in back] == [s.to_line() for s in spins]
    assert meta.get("note") == "two strings"


def test_strings_io_rejects_mixed_conventions(tmp_path):
    path = tmp_path / "w.txt"
    write_strings([BitString.spins([1, -1]), BitString.bits([0, 1])], path)
    with pytest.raises(GraphFormatError):
        read_strings(path)

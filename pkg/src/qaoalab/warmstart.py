"""Classical generators of good strings and thermal-state machinery.

Three generators cover the starting strings studied here: fixed-temperature
Metropolis sampling (the thermal ensemble), a low-rank Goemans-Williamson
relaxation with hyperplane roundings, and greedy independent sets. The
thermal side also provides exact Boltzmann sampling by enumeration and the
temperature calibration used to compare a string against the thermal state
of matching mean cost.

Every sampler derives its random stream from (seed, salt) so batch
generation with per-item seeds is reproducible and order-independent.
"""

from dataclasses import dataclass

import numpy as np

from ._kernels import metropolis_kernel
from .problems import ENUM_CAP, SPIN, BitString

_GW_SWEEPS = 50
_GW_ROUNDINGS = 100
_UPDATES_PER_SITE = 1000


def _flat_seed(seed):
    if isinstance(seed, (tuple, list)):
        out = []
        for part in seed:
            out.extend(_flat_seed(part))
        return out
    return [int(seed)]


def _stream(seed, salt):
    # nested tuples arise when batch drivers derive (seed, item) streams
    return np.random.default_rng(_flat_seed(seed) + [salt])


@dataclass(frozen=True)
class ThermalSpec:
    """Target thermal state exp(beta C)/Z plus sampling budget."""

    beta: float
    sweeps: int = _UPDATES_PER_SITE
    seed: int = 0

    def __post_init__(self):
        if self.beta < 0:
            raise ValueError("beta must be nonnegative")
        if self.sweeps < 1:
            raise ValueError("sweeps must be >= 1")

    @property
    def temperature(self):
        return np.inf if self.beta == 0 else 1.0 / self.beta

    @classmethod
    def from_temperature(cls, t, sweeps=_UPDATES_PER_SITE, seed=0):
        if t <= 0:
            raise ValueError("temperature must be positive")
        return cls(beta=1.0 / t, sweeps=sweeps, seed=seed)


def _spins_to_string(cost, spins):
    z = spins.astype(np.int64)
    if cost.convention == SPIN:
        return BitString.spins(z)
    return BitString.bits((1 - z) // 2)


def metropolis_sample(graph, cost, t, updates=None, seed=0, cluster=False):
    """One string from the Markov chain targeting exp(C(z)/T).

    Single-site Metropolis; with cluster=True a Wolff-style collective
    flip is interleaved after every n single-site updates (valid only for
    costs without vertex fields, where the move preserves the target).
    """
    if t <= 0:
        raise ValueError("temperature must be positive")
    n = graph.n
    if updates is None:
        updates = _UPDATES_PER_SITE * n
    coup, fields, _ = cost.ising_form()
    rng = _stream(seed, 0xA5)
    spins = rng.choice(np.array([-1.0, 1.0]), size=n)
    if not cluster:
        kseed = int(rng.integers(1, 2**31 - 1))
        metropolis_kernel(graph.indptr, graph.adj, graph.adj_edge,
                          coup, fields, spins, 1.0 / t, updates, kseed)
        return _spins_to_string(cost, spins)
    if np.any(fields != 0.0):
        raise ValueError("cluster moves need a field-free cost")
    done = 0
    while done < updates:
        chunk = min(n, updates - done)
        kseed = int(rng.integers(1, 2**31 - 1))
        metropolis_kernel(graph.indptr, graph.adj, graph.adj_edge,
                          coup, fields, spins, 1.0 / t, chunk, kseed)
        done += chunk
        _wolff_flip(graph, coup, spins, t, rng)
    return _spins_to_string(cost, spins)


def _wolff_flip(graph, coup, spins, t, rng):
    # grow a cluster across energetically satisfied bonds and flip it;
    # bond (i, j) joins with prob 1 - exp(-2|c|/T) when c z_i z_j > 0
    n = spins.shape[0]
    start = int(rng.integers(n))
    in_cluster = np.zeros(n, dtype=bool)
    in_cluster[start] = True
    frontier = [start]
    while frontier:
        i = frontier.pop()
        for k in range(int(graph.indptr[i]), int(graph.indptr[i + 1])):
            j = int(graph.adj[k])
            if in_cluster[j]:
                continue
            c = coup[graph.adj_edge[k]]
            if c * spins[i] * spins[j] <= 0:
                continue
            if rng.random() < 1.0 - np.exp(-2.0 * abs(c) / t):
                in_cluster[j] = True
                frontier.append(j)
    spins[in_cluster] *= -1.0


def goemans_williamson(graph, seed=0, rank=None, roundings=_GW_ROUNDINGS):
    """Best-of-`roundings` hyperplane cut of a low-rank relaxation.

    The relaxation keeps one unit vector per vertex and maximizes the cut
    objective by coordinate ascent (v_i <- -normalize(sum of neighbors)),
    a Burer-Monteiro style substitute for the full semidefinite program.
    """
    n = graph.n
    if rank is None:
        rank = int(np.ceil(np.sqrt(2 * n)))
    if rank < 2:
        raise ValueError("rank must be >= 2")
    if roundings < 1:
        raise ValueError("roundings must be >= 1")
    rng = _stream(seed, 0x67)
    vecs = rng.normal(size=(n, rank))
    vecs /= np.linalg.norm(vecs, axis=1, keepdims=True)
    for _ in range(_GW_SWEEPS):
        for i in range(n):
            s = -vecs[graph.adj[graph.indptr[i]:graph.indptr[i + 1]]].sum(axis=0)
            nrm = np.linalg.norm(s)
            if nrm > 1e-12:
                vecs[i] = s / nrm
    u, v = graph.edges[:, 0], graph.edges[:, 1]
    best_val = -1
    best = None
    for _ in range(roundings):
        r = rng.normal(size=rank)
        spins = np.where(vecs @ r >= 0, 1, -1)
        val = int((graph.m - int(spins[u] @ spins[v])) // 2)
        if val > best_val:
            best_val, best = val, spins
    return BitString.spins(best)


def greedy_mis(graph, seed=0):
    """Greedy independent set, ascending degree with seed-shuffled ties."""
    n = graph.n
    rng = _stream(seed, 0x9D)
    perm = rng.permutation(n)
    order = perm[np.argsort(graph.degrees[perm], kind="stable")]
    chosen = np.zeros(n, dtype=np.int64)
    blocked = np.zeros(n, dtype=bool)
    for i in order:
        if not blocked[i]:
            chosen[i] = 1
            blocked[graph.adj[graph.indptr[i]:graph.indptr[i + 1]]] = True
    return BitString.bits(chosen)


def exact_boltzmann_sample(graph, cost, beta, seed=0, count=1):
    """i.i.d. strings with probabilities exp(beta C)/Z, by enumeration."""
    table = cost.cost_table()
    logits = beta * (table - table.max())
    probs = np.exp(logits)
    probs /= probs.sum()
    rng = _stream(seed, 0x1B)
    idx = rng.choice(table.size, size=count, p=probs)
    n = graph.n
    return [BitString.from_index(int(i), n, cost.convention) for i in idx]


def thermal_mean_cost(cost, beta):
    """Tr(C rho_beta) by exact enumeration."""
    table = cost.cost_table()
    w = np.exp(beta * (table - table.max()))
    return float((table * w).sum() / w.sum())


def _mcmc_mean_cost(graph, cost, beta, seed, chains=16, updates=None):
    t = np.inf if beta == 0 else 1.0 / beta
    if updates is None:
        updates = 300 * graph.n
    vals = []
    for i in range(chains):
        if beta == 0:
            rng = _stream((seed, i), 0xA5)
            spins = rng.choice(np.array([-1.0, 1.0]), size=graph.n)
            vals.append(cost.value(_spins_to_string(cost, spins)))
        else:
            w = metropolis_sample(graph, cost, t, updates=updates, seed=(seed, i))
            vals.append(cost.value(w))
    return float(np.mean(vals))


def calibrate_beta(graph, cost, target, tol=1e-6, seed=0):
    """beta with Tr(C rho_beta) = target, by bisection.

    Exact enumeration when the graph fits the enumeration cap, Markov
    chain estimates (tolerance limited by sampling noise) otherwise.
    Requires mean cost < target < max cost; target equal to the mean
    gives beta = 0.
    """
    exact = graph.n <= ENUM_CAP
    if exact:
        table = cost.cost_table()
        mean, mx = float(table.mean()), float(table.max())

        def f(b):
            return thermal_mean_cost(cost, b)
    else:
        mean = _mcmc_mean_cost(graph, cost, 0.0, seed)
        mx = float(np.inf)

        def f(b):
            return _mcmc_mean_cost(graph, cost, b, seed)
    if target == mean:
        return 0.0
    if not (mean < target < mx):
        raise ValueError(
            f"target {target} outside (mean, max) = ({mean}, {mx})"
        )
    hi = 1.0
    while f(hi) < target:
        hi *= 2.0
        if hi > 1e12:
            raise ValueError(f"target {target} not reachable at any beta")
    lo = 0.0
    steps = 200 if exact else 18
    for _ in range(steps):
        mid = 0.5 * (lo + hi)
        val = f(mid)
        if exact and abs(val - target) < tol:
            return mid
        if val < target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def string_batch(graph, cost, generator, count, seed=0, **params):
    """`count` strings from one generator, seeds derived per item.

    generator: 'sa' (params: t, updates, cluster), 'gw' (rank, roundings),
    or 'greedy-mis'.
    """
    out = []
    for i in range(count):
        s = (seed, i)
        if generator == "sa":
            out.append(metropolis_sample(
                graph, cost, params.get("t", 1.75),
                updates=params.get("updates"), seed=s,
                cluster=params.get("cluster", False)))
        elif generator == "gw":
            out.append(goemans_williamson(
                graph, seed=s, rank=params.get("rank"),
                roundings=params.get("roundings", _GW_ROUNDINGS)))
        elif generator == "greedy-mis":
            out.append(greedy_mis(graph, seed=s))
        else:
            raise ValueError(f"unknown generator {generator!r}")
    return out

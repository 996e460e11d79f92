"""Closed-form conditions, local ensembles, and improvement bounds.

This module collects everything that is *checked* rather than simulated:
the small-angle improvement condition on cubic graphs, the local/thermal
tree ensembles and the thermality coefficient that bounds warm-start
improvement, the sample-deviation statistic and its power-law fit, the
magic-angle cat-state construction, the counting bounds for compressed
strings, and the decoupled-graph / independent-set closed forms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import CapacityError, ConventionError, GraphFormatError
from .problems import (
    ENUM_CAP,
    MAXCUT,
    SK,
    SPIN,
    BitString,
    CostFunction,
    Graph,
    flip_deltas,
)
from .localsim import all_neighborhoods, tree_fraction
from .statevector import (
    STATEVECTOR_CAP,
    apply_mixer,
    apply_phase,
    basis_state,
)
from .warmstart import calibrate_beta


# ---------------------------------------------------------------------------
# local / thermal tree ensembles


@dataclass(frozen=True)
class NeighborhoodDistribution:
    """Probability distribution over strings on one abstract tree ball.

    `probs[x]` is the probability of the local pattern whose big-endian
    index is x, in the shared canonical vertex order (distance from the
    center edge, then parent position, then global index) used by the
    local evaluator.  All balls of a regular graph at fixed radius are
    isomorphic trees, so distributions from different edges, strings, or
    graphs of the same degree compare entry by entry.
    """

    probs: np.ndarray
    radius: int
    size: int  # number of vertices in the ball

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float)
        if p.shape != (1 << self.size,):
            raise ValueError("probability array does not match ball size")
        if p.min() < -1e-12:
            raise ValueError("negative probability")
        if abs(p.sum() - 1.0) > 1e-12:
            raise ValueError("probabilities do not sum to 1")
        object.__setattr__(self, "probs", p)

    def l1_distance(self, other: "NeighborhoodDistribution") -> float:
        if self.radius != other.radius or self.size != other.size:
            raise ValueError("distributions live on different balls")
        return float(np.abs(self.probs - other.probs).sum())

    def support(self):
        """Nonzero patterns as (bit tuple, probability) pairs."""
        out = []
        for x in np.nonzero(self.probs)[0]:
            bits = tuple((int(x) >> (self.size - 1 - i)) & 1
                         for i in range(self.size))
            out.append((bits, float(self.probs[x])))
        return out


def _tree_neighborhoods(graph: Graph, r: int):
    """Tree balls of radius r, all required to have equal size."""
    nbs = [nb for nb in all_neighborhoods(graph, r) if nb.is_tree]
    if not nbs:
        raise GraphFormatError(f"no tree neighborhoods at radius {r}")
    sizes = {nb.n_vertices for nb in nbs}
    if len(sizes) > 1:
        raise GraphFormatError(
            "tree balls of unequal size; local ensembles need a regular graph")
    return nbs


def _ball_matrix(nbs):
    # rows: vertex ids of each ball; shared weights for big-endian indexing
    V = np.array([nb.vertices for nb in nbs], dtype=np.int64)
    size = V.shape[1]
    weights = 1 << np.arange(size - 1, -1, -1, dtype=np.int64)
    return V, weights, size


def local_ensemble(graph: Graph, w: BitString, r: int) -> NeighborhoodDistribution:
    """Empirical distribution of w restricted to every tree ball.

    Each of the |E_T| tree neighborhoods contributes weight 1/|E_T| on
    the local pattern of w, read off in the canonical vertex order.
    """
    if w.n != graph.n:
        raise ValueError("string length does not match graph")
    nbs = _tree_neighborhoods(graph, r)
    V, weights, size = _ball_matrix(nbs)
    bits = w.as_bits().astype(np.int64)
    idx = bits[V] @ weights
    probs = np.bincount(idx, minlength=1 << size) / len(nbs)
    return NeighborhoodDistribution(probs, r, size)


def thermal_tree_ensemble_exact(graph: Graph, beta: float,
                                r: int) -> NeighborhoodDistribution:
    """Boltzmann distribution e^{beta C}/Z marginalized onto the tree balls.

    C is the cut count, so beta > 0 favors good cuts.  Exact enumeration;
    n must be within the enumeration cap.
    """
    if graph.n > ENUM_CAP:
        raise CapacityError(
            f"n={graph.n} exceeds enumeration cap {ENUM_CAP}")
    cost = CostFunction(MAXCUT, graph)
    table = cost.cost_table()
    wgt = np.exp(beta * (table - table.max()))
    wgt /= wgt.sum()

    nbs = _tree_neighborhoods(graph, r)
    V, weights, size = _ball_matrix(nbs)
    # bit b of global index i is (i >> (n-1-b)) & 1, matching BitString
    all_bits = (np.arange(1 << graph.n)[:, None]
                >> (graph.n - 1 - np.arange(graph.n))) & 1
    probs = np.zeros(1 << size)
    for k in range(len(nbs)):
        idx = all_bits[:, V[k]] @ weights
        probs += np.bincount(idx, weights=wgt, minlength=1 << size)
    probs /= len(nbs)
    return NeighborhoodDistribution(probs, r, size)


def thermality_coefficient(graph: Graph, w: BitString, r: int) -> float:
    """L1 distance between w's local ensemble and the thermal tree ensemble
    at the temperature where the thermal cut count equals C(w).

    Always in [0, 2].  Raises when the calibration target is out of range
    (w no better than random, or a perfect cut) or n exceeds the
    enumeration cap.
    """
    cost = CostFunction(MAXCUT, graph)
    beta = calibrate_beta(graph, cost, float(cost.value(w)))
    rho_beta = thermal_tree_ensemble_exact(graph, beta, r)
    rho_w = local_ensemble(graph, w, r)
    return rho_beta.l1_distance(rho_w)


def thermal_bound(graph: Graph, w: BitString, r: int) -> float:
    """Upper bound c(w) + 2*eps_w + 4*delta on the optimized cut fraction
    reachable from w, with delta the fraction of non-tree balls."""
    cost = CostFunction(MAXCUT, graph)
    eps = thermality_coefficient(graph, w, r)
    delta = 1.0 - tree_fraction(graph, r)
    return float(cost.value(w)) / graph.m + 2.0 * eps + 4.0 * delta


def sample_deviation(strings: Sequence[BitString], graph: Graph,
                     r: int) -> float:
    """Average L1 deviation of the strings' local ensembles from their mean:
    E = (1/k) sum_a ||rho_a - mean||_1.  Needs at least two strings."""
    if len(strings) < 2:
        raise ValueError("sample deviation needs at least 2 strings")
    dists = [local_ensemble(graph, s, r) for s in strings]
    P = np.stack([d.probs for d in dists])
    mean = P.mean(axis=0)
    return float(np.abs(P - mean).sum(axis=1).mean())


@dataclass(frozen=True)
class PowerLawFit:
    """Least-squares fits of log E against log n for the scaling figure."""

    amplitude: float        # c in E = c * n^{-1/2}, slope held at -1/2
    free_slope: float       # unconstrained slope (diagnostic)
    free_amplitude: float   # amplitude of the unconstrained fit


def fit_power_law(ns: Sequence[float], values: Sequence[float]) -> PowerLawFit:
    """One-parameter fit E = c*n^{-1/2} plus a free-slope diagnostic fit."""
    n = np.asarray(ns, dtype=float)
    e = np.asarray(values, dtype=float)
    if n.size != e.size or n.size < 2:
        raise ValueError("need at least 2 (n, E) pairs")
    if (n <= 0).any() or (e <= 0).any():
        raise ValueError("n and E must be positive for a log-log fit")
    ln, le = np.log(n), np.log(e)
    amp = math.exp(float(np.mean(le + 0.5 * ln)))
    slope, intercept = np.polyfit(ln, le, 1)
    return PowerLawFit(amp, float(slope), math.exp(float(intercept)))


# ---------------------------------------------------------------------------
# small-angle improvement condition (cubic graphs)


@dataclass(frozen=True)
class SmallAngleReport:
    """Flip sums deciding improvability at small mixing angles (cubic only).

    A string can be improved by a depth-3/2 circuit with arbitrarily small
    betas iff s1 > 0 or s3cube > 0, where s1 sums the deltas of unit
    magnitude and s3cube sums all deltas cubed.
    """

    deltas: np.ndarray
    s1: int
    s3cube: int
    condition: bool


def small_angle_condition(graph: Graph, w: BitString) -> SmallAngleReport:
    """Evaluate the small-angle improvement condition for w on a cubic graph."""
    if not graph.is_regular or graph.degree != 3:
        raise GraphFormatError(
            "small-angle condition is derived for 3-regular graphs")
    if w.convention != SPIN:
        w = BitString.spins(w.as_spins())
    deltas = flip_deltas(graph, w)
    s1 = int(deltas[np.abs(deltas) == 1].sum())
    s3 = int((deltas ** 3).sum())
    return SmallAngleReport(deltas, s1, s3, bool(s1 > 0 or s3 > 0))


# ---------------------------------------------------------------------------
# magic-angle cat states (sk couplings on the complete graph)


@dataclass(frozen=True)
class MagicAngleResult:
    """Output state of the magic-angle circuit and the predicted support."""

    state: np.ndarray
    wprime: BitString
    probabilities: tuple  # (P[w'], P[-w'])
    leak: float           # total probability outside {w', -w'}

    @property
    def cat(self) -> bool:
        return (self.leak < 1e-9
                and abs(self.probabilities[0] - 0.5) < 1e-9
                and abs(self.probabilities[1] - 0.5) < 1e-9)


def magic_angle_state(cost: CostFunction, w: BitString) -> MagicAngleResult:
    """Apply the magic-angle circuit to |w> and locate the resulting cat state.

    The circuit is the mixer at angle -pi/4, the phase separator at angle
    -pi/4 for the coupled cost, then the mixer at +pi/4.  For pair
    couplings J on the complete graph with n even, the output is supported
    on exactly two antipodal strings with probability 1/2 each: w' is w
    with bit i flipped iff the product of J over edges at i is negative.
    """
    if cost.kind != SK:
        raise ConventionError("magic angle needs pair couplings (sk cost)")
    graph = cost.graph
    n = graph.n
    if n % 2:
        raise ValueError("magic-angle cat state needs even n")
    if n > STATEVECTOR_CAP:
        raise CapacityError(f"n={n} exceeds statevector cap {STATEVECTOR_CAP}")
    if graph.m != n * (n - 1) // 2:
        raise GraphFormatError("magic angle is defined on the complete graph")
    if not np.all(np.abs(graph.J) == 1):
        raise ConventionError("magic angle needs unit couplings")
    if w.n != n:
        raise ValueError("string length does not match graph")

    state = basis_state(w)
    state = apply_mixer(state, -np.pi / 4, n)
    state = apply_phase(state, -np.pi / 4, cost.cost_table())
    state = apply_mixer(state, np.pi / 4, n)

    # flip rule: product of couplings at each vertex
    sign = np.ones(n)
    u, v = graph.edges[:, 0], graph.edges[:, 1]
    np.multiply.at(sign, u, np.sign(graph.J))
    np.multiply.at(sign, v, np.sign(graph.J))
    flips = sign < 0
    bits = w.as_bits() ^ flips
    wprime = BitString.bits(bits)
    if w.convention == SPIN:
        wprime = BitString.spins(wprime.as_spins())

    probs = np.abs(state) ** 2
    i1 = wprime.to_index()
    i2 = wprime.complement().to_index()
    p1, p2 = float(probs[i1]), float(probs[i2])
    leak = float(probs.sum() - p1 - p2)
    return MagicAngleResult(state, wprime, (p1, p2), leak)


# ---------------------------------------------------------------------------
# counting bounds for compressed strings


@dataclass(frozen=True)
class CompressionInputs:
    """Counts and parameters for the compression bounds.

    d0 strings lie in the starting cost window, d1 at or above the target
    cost; p is the circuit depth, n the qubit count, and delta the success
    probability demanded of the improvement.
    """

    d0: int
    d1: int
    p: float
    n: int
    delta: float = 1.0

    def __post_init__(self):
        if self.d0 < 1:
            raise ValueError("d0 must be at least 1")
        if self.d1 < 0:
            raise ValueError("d1 must be nonnegative")
        if self.p <= 0:
            raise ValueError("depth p must be positive")
        if self.n < 1:
            raise ValueError("n must be positive")
        if not 0.0 < self.delta <= 1.0:
            raise ValueError("delta must lie in (0, 1]")


def compression_epsilon(inputs: CompressionInputs) -> float:
    """Precision below which typical window strings cannot be improved:
    eps = (2 d1/d0)^(1/(2p+2)) * (16 pi p n^2)^(p/(p+1)).

    Values >= 1 make the bound vacuous; they are returned as computed and
    flagged by the caller, never clamped.
    """
    if inputs.d1 == 0:
        return 0.0
    p = inputs.p
    ratio = 2.0 * inputs.d1 / inputs.d0
    scale = 16.0 * math.pi * p * inputs.n ** 2
    return ratio ** (1.0 / (2.0 * p + 2.0)) * scale ** (p / (p + 1.0))


def improvable_count_bound(d1: int, delta: float, p: float, n: int) -> float:
    """Bound on how many strings any depth-p circuit can improve:
    M <= (2 d1/delta) * (16 pi p n^2/delta)^(2p)."""
    if delta <= 0.0 or delta > 1.0:
        raise ValueError("delta must lie in (0, 1]")
    if d1 < 0:
        raise ValueError("d1 must be nonnegative")
    if p <= 0:
        raise ValueError("depth p must be positive")
    if d1 == 0:
        return 0.0
    scale = 16.0 * math.pi * p * n ** 2 / delta
    return (2.0 * d1 / delta) * scale ** (2.0 * p)


# ---------------------------------------------------------------------------
# decoupled-graph and independent-set closed forms


def decoupled_oracle(edge_values, theta: float, phi: float = 0.0) -> np.ndarray:
    """Per-edge expectations on the decoupled graph after a block rotation.

    Any warm-start circuit acts on each edge's {string, flipped-pair} block
    as a rotation by some theta (up to a phase phi that cancels in
    expectations): an unsatisfied edge rises to sin^2(theta)/2 and a
    satisfied edge drops to 1 - sin^2(theta)/2.
    """
    vals = np.asarray(edge_values, dtype=float)
    if vals.size and not np.isin(vals, (0.0, 1.0)).all():
        raise ValueError("edge values must be 0 (unsatisfied) or 1 (satisfied)")
    s = 0.5 * np.sin(theta) ** 2
    return np.where(vals > 0.5, 1.0 - s, s)


@dataclass(frozen=True)
class MisHalfReport:
    """Depth-1/2 independent-set expectation and its optimum over beta1."""

    value: float          # expectation at the queried beta1
    optimal_sin2: float   # sin^2(beta1) at the optimum
    optimal_beta1: float
    optimal_value: float
    improvable: bool      # optimum strictly exceeds the starting value W - K


def mis_p_half(n: int, d: int, W: int, K: int,
               beta1: Optional[float] = None) -> MisHalfReport:
    """Closed-form depth-1/2 expectation for a d-regular independent-set
    start with W marked vertices and K violated edges.

    value(b) = W - K + (d/2)(4W - n) sin^4 b + (n - W(d+2)) sin^2 b
             + K sin^2(2b)

    The optimum over sin^2 b in [0, 1] is analytic; for K = 0 it sits at
    sin^2 b = (n - W(d+2)) / (d (n - 4W)) when that is admissible, and
    improvement over W is possible iff W < n/(d+2).  The degenerate
    quadratic (e.g. n = 4W with K = 0) falls back to a direct scan.
    """
    if n < 1 or d < 1:
        raise ValueError("need n >= 1 and d >= 1")
    if not 0 <= W <= n:
        raise ValueError("W must lie in [0, n]")
    if K < 0:
        raise ValueError("K must be nonnegative")

    # quadratic in x = sin^2(beta1): f(x) = a x^2 + b x + (W - K)
    a = 0.5 * d * (4 * W - n) - 4.0 * K
    b = (n - W * (d + 2)) + 4.0 * K

    def f(x):
        return (W - K) + a * x * x + b * x

    if a == 0.0:
        xs = np.linspace(0.0, 1.0, 20001)
        x_opt = float(xs[np.argmax(f(xs))])
    else:
        cands = [0.0, 1.0]
        vertex = -b / (2.0 * a)
        if 0.0 <= vertex <= 1.0:
            cands.append(vertex)
        x_opt = max(cands, key=f)
    opt_val = float(f(x_opt))
    opt_beta = float(math.asin(math.sqrt(x_opt)))

    if beta1 is None:
        value = opt_val
    else:
        value = float(f(math.sin(beta1) ** 2))
    improvable = opt_val > (W - K) + 1e-12
    return MisHalfReport(value, float(x_opt), opt_beta, opt_val, improvable)

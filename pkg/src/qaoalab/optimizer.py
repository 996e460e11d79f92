"""Angle optimization: Nelder-Mead with seeded random restarts.

The search maximizes the cost expectation of whichever evaluator it is
handed (a callable from a flat angle vector to a real number). The
all-zero angle point is always scored alongside the restarts, so a
warm-start optimization can never report less than the starting string's
own cost. Restart i draws its initial point from the stream seeded by
(seed, i); running with more restarts extends, rather than reshuffles,
the set of starts.
"""

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .localsim import LocalEvaluator
from .statevector import (
    STANDARD,
    WARMSTART,
    QaoaParams,
    expectation,
    qaoa_state,
    warmstart_params_for_p,
)

IMPROVEMENT_TOL = 1e-6

# simplex convergence tolerance and the per-variable iteration budget
_NM_TOL = 1e-8
_NM_MAXITER_FACTOR = 400


@dataclass
class OptimizationResult:
    best_params: QaoaParams
    best_value: float
    initial_cost: float
    improved: bool
    restarts_used: int


def flat_bounds(pattern, num_angles):
    """Angle box for the flat layout: gamma in [0, 2pi), beta in [0, pi)."""
    out = []
    for i in range(num_angles):
        is_gamma = (i % 2 == 0) if pattern == STANDARD else (i % 2 == 1)
        out.append((0.0, 2 * np.pi) if is_gamma else (0.0, np.pi))
    return out


def _pattern_for(num_angles):
    # flat layouts: odd angle counts are warm-start, even are standard
    return WARMSTART if num_angles % 2 == 1 else STANDARD


def optimize(evaluator, num_angles, restarts=40, seed=0, bounds=None,
             extra_starts=()):
    """Maximize evaluator over `num_angles` flat angles.

    Runs Nelder-Mead from `restarts` uniform random points in `bounds`
    (plus any `extra_starts`), scores the all-zero point, and returns the
    best. Deterministic for a fixed seed; the restart streams are derived
    as (seed, restart index).
    """
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    pattern = _pattern_for(num_angles)
    if bounds is None:
        bounds = flat_bounds(pattern, num_angles)
    if len(bounds) != num_angles:
        raise ValueError("bounds length must match num_angles")
    lo = np.array([b[0] for b in bounds])
    hi = np.array([b[1] for b in bounds])

    zero = np.zeros(num_angles)
    initial = float(evaluator(zero))
    best_x, best_val = zero, initial

    def neg(x):
        return -evaluator(x)

    opts = dict(
        xatol=_NM_TOL,
        fatol=_NM_TOL,
        maxiter=_NM_MAXITER_FACTOR * num_angles,
        maxfev=_NM_MAXITER_FACTOR * num_angles,
    )
    starts = [np.asarray(x, dtype=np.float64) for x in extra_starts]
    for i in range(restarts):
        rng = np.random.default_rng((seed, i))
        starts.append(rng.uniform(lo, hi))
    for x0 in starts:
        res = minimize(neg, x0, method="Nelder-Mead", bounds=bounds, options=opts)
        if -res.fun > best_val:
            best_val = -res.fun
            best_x = np.asarray(res.x)
    return OptimizationResult(
        best_params=QaoaParams.from_flat(pattern, best_x),
        best_value=float(best_val),
        initial_cost=initial,
        improved=best_val - initial > IMPROVEMENT_TOL,
        restarts_used=restarts,
    )


def statevector_evaluator(cost, w, p):
    """Flat-angle warm-start evaluator backed by the dense simulator."""
    k, _ = warmstart_params_for_p(p)
    num_angles = 2 * k - 1

    def ev(angles):
        params = QaoaParams.from_flat(WARMSTART, np.asarray(angles))
        if params.num_angles != num_angles:
            raise ValueError(f"expected {num_angles} angles")
        return expectation(qaoa_state(cost, params, start=w), cost)

    ev.num_angles = num_angles
    ev.pattern = WARMSTART
    return ev


def improvement_report(graph, cost, w, p, restarts=40, seed=0,
                       backend="localsim"):
    """Optimize a warm start from w at depth p; verdict uses tolerance 1e-6."""
    if backend == "localsim":
        evaluator = LocalEvaluator(graph, cost, w, p)
    elif backend == "statevector":
        cost.check_convention(w)
        evaluator = statevector_evaluator(cost, w, p)
    else:
        raise ValueError(f"unknown backend {backend!r}")
    return optimize(evaluator, evaluator.num_angles, restarts=restarts, seed=seed)


def small_beta_optimize(graph, cost, w, beta_max=0.05, gamma_grid=24):
    """Best p=3/2 value with both betas confined to [-beta_max, beta_max].

    Scans a gamma grid with the two structured beta pairs (h, h) and
    (h, -h) at half the box size, then polishes the best grid point with
    a bounded Nelder-Mead over all three angles. The zero point is always
    a candidate, so the result is at least C(w).
    """
    evaluator = LocalEvaluator(graph, cost, w, 1.5)
    zero = np.zeros(3)
    best_x, best_val = zero, float(evaluator(zero))
    if beta_max <= 0:
        return best_val
    if np.isscalar(gamma_grid):
        gammas = np.linspace(0.0, 2 * np.pi, int(gamma_grid), endpoint=False)
    else:
        gammas = np.asarray(gamma_grid, dtype=np.float64)
    h = beta_max / 2
    for g in gammas:
        for b2 in (h, -h):
            x = np.array([h, g, b2])
            v = float(evaluator(x))
            if v > best_val:
                best_val, best_x = v, x
    bounds = [(-beta_max, beta_max), (0.0, 2 * np.pi), (-beta_max, beta_max)]
    res = minimize(
        lambda x: -evaluator(x), best_x, method="Nelder-Mead", bounds=bounds,
        options=dict(xatol=1e-10, fatol=1e-10, maxiter=1200, maxfev=1200),
    )
    return float(max(best_val, -res.fun))

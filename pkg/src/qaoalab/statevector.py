"""Dense statevector simulation of standard and warm-start QAOA.

States are complex128 numpy arrays of length 2^n indexed big-endian in
vertex order (problems module convention). The phase layer is a diagonal
multiply by exp(-i gamma C); the mixer layer applies exp(-i beta X) to
every qubit.

Circuit patterns:

  standard   e^{-i b_p B} e^{-i g_p C} ... e^{-i b_1 B} e^{-i g_1 C} |uniform>
  warmstart  e^{-i b_k B} e^{-i g_{k-1} C} ... e^{-i g_1 C} e^{-i b_1 B} |w>

The warm-start pattern drops the leading phase layer (it only contributes a
global phase on a basis-state or iso-cost start), leaving 2k-1 angles and a
fractional depth p = (2k-1)/2.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from .errors import CapacityError, ConventionError
from .problems import BitString, CostFunction

STATEVECTOR_CAP = 20

STANDARD = "standard"
WARMSTART = "warmstart"


# ----------------------------------------------------------------------
# parameters
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class QaoaParams:
    """Angle schedule for one circuit.

    standard: len(gammas) == len(betas) == p, applied gamma-first.
    warmstart: len(betas) == len(gammas) + 1, applied beta-first.
    """

    pattern: str
    gammas: Tuple[float, ...]
    betas: Tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "gammas", tuple(float(g) for g in self.gammas))
        object.__setattr__(self, "betas", tuple(float(b) for b in self.betas))
        if self.pattern == STANDARD:
            if len(self.gammas) != len(self.betas) or not self.betas:
                raise ValueError("standard pattern needs p gammas and p betas, p >= 1")
        elif self.pattern == WARMSTART:
            if len(self.betas) != len(self.gammas) + 1:
                raise ValueError("warm-start pattern needs k betas and k-1 gammas")
        else:
            raise ValueError(f"unknown pattern {self.pattern!r}")

    @classmethod
    def standard(cls, gammas: Sequence[float], betas: Sequence[float]) -> "QaoaParams":
        return cls(STANDARD, tuple(gammas), tuple(betas))

    @classmethod
    def warmstart(cls, betas: Sequence[float], gammas: Sequence[float] = ()) -> "QaoaParams":
        return cls(WARMSTART, tuple(gammas), tuple(betas))

    @property
    def p(self) -> float:
        """Circuit depth; half-integral for the warm-start pattern."""
        if self.pattern == STANDARD:
            return float(len(self.gammas))
        return (2 * len(self.betas) - 1) / 2

    @property
    def num_angles(self) -> int:
        return len(self.gammas) + len(self.betas)

    def flat(self) -> np.ndarray:
        """Optimizer layout: standard [g1, b1, g2, ...], warm [b1, g1, b2, ...]."""
        out = np.zeros(self.num_angles)
        if self.pattern == STANDARD:
            out[0::2] = self.gammas
            out[1::2] = self.betas
        else:
            out[0::2] = self.betas
            out[1::2] = self.gammas
        return out

    @classmethod
    def from_flat(cls, pattern: str, angles: Sequence[float]) -> "QaoaParams":
        angles = np.asarray(angles, dtype=np.float64)
        if pattern == STANDARD:
            if len(angles) % 2 != 0 or len(angles) == 0:
                raise ValueError("standard pattern needs an even angle count")
            return cls(STANDARD, tuple(angles[0::2]), tuple(angles[1::2]))
        if pattern == WARMSTART:
            if len(angles) % 2 != 1:
                raise ValueError("warm-start pattern needs an odd angle count")
            return cls(WARMSTART, tuple(angles[1::2]), tuple(angles[0::2]))
        raise ValueError(f"unknown pattern {pattern!r}")

    def bounds(self):
        """Per-flat-angle box: gamma in [0, 2pi), beta in [0, pi)."""
        out = []
        for k in range(self.num_angles):
            is_gamma = (k % 2 == 0) if self.pattern == STANDARD else (k % 2 == 1)
            out.append((0.0, 2 * np.pi) if is_gamma else (0.0, np.pi))
        return out


def warmstart_params_for_p(p: float) -> Tuple[int, int]:
    """(num_betas, num_gammas) for a half-integral warm-start depth p."""
    k2 = round(2 * p)
    if abs(2 * p - k2) > 1e-12 or k2 % 2 == 0 or k2 < 1:
        raise ValueError(f"warm-start depth must be half-integral, got {p}")
    k = (k2 + 1) // 2
    return k, k - 1


# ----------------------------------------------------------------------
# state construction and evolution
# ----------------------------------------------------------------------

def uniform_state(n: int) -> np.ndarray:
    if n > STATEVECTOR_CAP:
        raise CapacityError(f"n={n} exceeds statevector cap {STATEVECTOR_CAP}")
    size = 1 << n
    return np.full(size, 1.0 / np.sqrt(size), dtype=np.complex128)

def basis_state(w: BitString, cap: int = STATEVECTOR_CAP) -> np.ndarray:
    if w.n > cap:
        raise CapacityError(f"n={w.n} exceeds statevector cap {cap}")
    state = np.zeros(1 << w.n, dtype=np.complex128)
    state[w.to_index()] = 1.0
    return state

def iso_cost_state(cost: CostFunction, value: int) -> np.ndarray:
    """Uniform superposition over all strings of the given cost."""
    n = cost.graph.n
    if n > STATEVECTOR_CAP:
        raise CapacityError(f"n={n} exceeds statevector cap {STATEVECTOR_CAP}")
    table = cost.cost_table()
    mask = table == value
    count = int(mask.sum())
    if count == 0:
        raise ValueError(f"no strings with cost {value}")
    state = np.zeros(1 << n, dtype=np.complex128)
    state[mask] = 1.0 / np.sqrt(count)
    return state

def apply_phase(state: np.ndarray, gamma: float, table: np.ndarray) -> np.ndarray:
    state *= np.exp(-1j * gamma * table)
    return state

def apply_mixer(state: np.ndarray, beta: float, n: Optional[int] = None) -> np.ndarray:
    """exp(-i beta X) on every qubit, in place."""
    if n is None:
        n = state.size.bit_length() - 1
    c = np.cos(beta)
    s = 1j * np.sin(beta)
    for i in range(n):
        view = state.reshape(1 << i, 2, -1)
        a = view[:, 0, :].copy()
        b = view[:, 1, :]
        view[:, 0, :] = c * a - s * b
        view[:, 1, :] = c * b - s * a
    return state


def qaoa_state(cost: CostFunction, params: QaoaParams,
               start: Optional[BitString] = None,
               iso_cost_value: Optional[int] = None,
               cap: int = STATEVECTOR_CAP) -> np.ndarray:
    """Run the circuit and return the final state.

    standard pattern: uniform start (start/iso_cost_value must be None).
    warm-start pattern: exactly one of start (a basis string, in the cost's
    convention) or iso_cost_value (uniform superposition at that cost).
    """
    n = cost.graph.n
    if n > cap:
        raise CapacityError(f"n={n} exceeds statevector cap {cap}")
    table = cost.cost_table()
    if params.pattern == STANDARD:
        if start is not None or iso_cost_value is not None:
            raise ValueError("standard pattern starts from the uniform state")
        state = uniform_state(n)
        for gamma, beta in zip(params.gammas, params.betas):
            apply_phase(state, gamma, table)
            apply_mixer(state, beta, n)
        return state
    if (start is None) == (iso_cost_value is None):
        raise ValueError("warm start needs exactly one of start / iso_cost_value")
    if start is not None:
        cost.check_convention(start)
        state = basis_state(start, cap)
    else:
        state = iso_cost_state(cost, iso_cost_value)
    apply_mixer(state, params.betas[0], n)
    for gamma, beta in zip(params.gammas, params.betas[1:]):
        apply_phase(state, gamma, table)
        apply_mixer(state, beta, n)
    return state


def expectation(state: np.ndarray, cost: CostFunction) -> float:
    table = cost.cost_table()
    probs = np.abs(state) ** 2
    return float(probs @ table)


def success_probability(state: np.ndarray, cost: CostFunction, threshold: float) -> float:
    """Total probability of measuring a string with cost >= threshold."""
    table = cost.cost_table()
    probs = np.abs(state) ** 2
    return float(probs[table >= threshold - 1e-9].sum())

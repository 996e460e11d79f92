"""Problem instances: graphs, bit strings, and classical cost functions.

Everything downstream (simulators, warm starts, analysis) builds on this
module. Conventions used throughout the package:

  * vertices are 0..n-1; edges are unordered pairs stored with u < v
  * bit i of a string belongs to qubit/vertex i
  * basis index of a string is big-endian in vertex order
    (bit 0 is the most significant bit of the index)
  * spin +1 corresponds to bit 0, spin -1 to bit 1

Cost functions are integer valued on valid strings and are always expressed
as a sum of per-edge terms bounded by 1 in absolute value (the MIS relaxation
folds its vertex term into the edges, which requires a regular graph).
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Iterable, List, Optional, Tuple

import numpy as np

from .errors import CapacityError, ConventionError, GraphFormatError

# Enumeration over all 2^n strings refuses anything past this.
ENUM_CAP = 24

SPIN = "spin"
BINARY = "binary"


# ----------------------------------------------------------------------
# graphs
# ----------------------------------------------------------------------

class Graph:
    """Simple undirected graph with optional +-1 edge couplings.

    Edges are canonicalized (u < v, lexicographically sorted) on
    construction; couplings are permuted along with them.
    """

    def __init__(self, n: int, edges, couplings=None):
        edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        if n < 1:
            raise ValueError("graph needs at least one vertex")
        if edges.size:
            if edges.min() < 0 or edges.max() >= n:
                raise ValueError("edge endpoint out of range")
        if np.any(edges[:, 0] == edges[:, 1]):
            raise ValueError("self loops are not allowed")
        lo = edges.min(axis=1)
        hi = edges.max(axis=1)
        canon = np.stack([lo, hi], axis=1)
        order = np.lexsort((canon[:, 1], canon[:, 0]))
        canon = canon[order]
        if len(canon) > 1 and np.any(np.all(canon[1:] == canon[:-1], axis=1)):
            raise ValueError("duplicate edge")
        self.n = int(n)
        self.edges = canon
        if couplings is not None:
            couplings = np.asarray(couplings, dtype=np.int64)
            if couplings.shape != (len(canon),):
                raise ValueError("need one coupling per edge")
            if not np.all(np.abs(couplings) == 1):
                raise ValueError("couplings must be +-1")
            couplings = couplings[order]
        self.J = couplings
        self._build_adjacency()
        self._neighborhood_cache = {}

    def _build_adjacency(self):
        m = len(self.edges)
        deg = np.zeros(self.n, dtype=np.int64)
        for u, v in self.edges:
            deg[u] += 1
            deg[v] += 1
        indptr = np.zeros(self.n + 1, dtype=np.int64)
        np.cumsum(deg, out=indptr[1:])
        adj = np.zeros(2 * m, dtype=np.int64)
        adj_edge = np.zeros(2 * m, dtype=np.int64)
        fill = indptr[:-1].copy()
        for e, (u, v) in enumerate(self.edges):
            adj[fill[u]] = v
            adj_edge[fill[u]] = e
            fill[u] += 1
            adj[fill[v]] = u
            adj_edge[fill[v]] = e
            fill[v] += 1
        # sort each adjacency block so iteration order is canonical
        for i in range(self.n):
            sl = slice(indptr[i], indptr[i + 1])
            perm = np.argsort(adj[sl], kind="stable")
            adj[sl] = adj[sl][perm]
            adj_edge[sl] = adj_edge[sl][perm]
        self.indptr = indptr
        self.adj = adj
        self.adj_edge = adj_edge
        self.degrees = deg

    @property
    def m(self) -> int:
        return len(self.edges)

    def neighbors(self, i: int) -> np.ndarray:
        return self.adj[self.indptr[i]:self.indptr[i + 1]]

    def incident_edges(self, i: int) -> np.ndarray:
        return self.adj_edge[self.indptr[i]:self.indptr[i + 1]]

    @property
    def is_regular(self) -> bool:
        return self.n > 0 and np.all(self.degrees == self.degrees[0])

    @property
    def degree(self) -> int:
        if not self.is_regular:
            raise ValueError("graph is not regular")
        return int(self.degrees[0])

    def serialize(self) -> str:
        kind = " sk" if self.J is not None else ""
        lines = [f"{self.n} {self.m}{kind}"]
        for e in range(self.m):
            u, v = self.edges[e]
            if self.J is not None:
                lines.append(f"{u} {v} {self.J[e]:+d}")
            else:
                lines.append(f"{u} {v}")
        return "\n".join(lines) + "\n"

    def hash(self) -> str:
        return hashlib.sha256(self.serialize().encode()).hexdigest()

    def __repr__(self):
        tag = ", sk" if self.J is not None else ""
        return f"Graph(n={self.n}, m={self.m}{tag})"


def generate_regular_graph(n: int, d: int, seed) -> Graph:
    """Random d-regular simple graph via the configuration model.

    Pairs stubs uniformly and restarts from scratch whenever the pairing
    produces a self loop or duplicate edge, so the result is uniform over
    simple pairings. Deterministic for a fixed seed.
    """
    if (n * d) % 2 != 0:
        raise ValueError("n * d must be even")
    if d >= n:
        raise ValueError("need d < n for a simple graph")
    if d < 1:
        raise ValueError("need d >= 1")
    rng = np.random.default_rng(seed)
    stubs = np.repeat(np.arange(n, dtype=np.int64), d)
    while True:
        perm = rng.permutation(stubs)
        pairs = perm.reshape(-1, 2)
        if np.any(pairs[:, 0] == pairs[:, 1]):
            continue
        lo = pairs.min(axis=1)
        hi = pairs.max(axis=1)
        keys = lo * n + hi
        if len(np.unique(keys)) != len(keys):
            continue
        return Graph(n, pairs)


def decoupled_graph(m: int) -> Graph:
    """m disjoint edges on 2m vertices: edge k joins (2k, 2k+1)."""
    if m < 1:
        raise ValueError("need at least one edge")
    edges = [(2 * k, 2 * k + 1) for k in range(m)]
    return Graph(2 * m, edges)


def complete_graph(n: int, couplings=None) -> Graph:
    edges = [(i, j) for i in range(n) for j in range(i + 1, n)]
    return Graph(n, edges, couplings)


def cycle_graph(n: int) -> Graph:
    if n < 3:
        raise ValueError("cycle needs n >= 3")
    edges = [(i, (i + 1) % n) for i in range(n)]
    return Graph(n, edges)


def random_sk_couplings(n: int, seed) -> np.ndarray:
    """Uniform +-1 couplings for the complete graph on n vertices."""
    rng = np.random.default_rng(seed)
    m = n * (n - 1) // 2
    return rng.choice(np.array([-1, 1], dtype=np.int64), size=m)


# ----------------------------------------------------------------------
# graph file format
# ----------------------------------------------------------------------

def write_graph(graph: Graph, path) -> None:
    with open(path, "w") as fh:
        fh.write(graph.serialize())


def read_graph(path) -> Graph:
    """Parse the edge-list format: header 'n m [sk]', then 'i j [J]' lines.

    Lines starting with '#' and blank lines are ignored. Vertices are
    0-indexed; malformed input raises GraphFormatError.
    """
    with open(path) as fh:
        lines = [ln.strip() for ln in fh]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if not lines:
        raise GraphFormatError("empty graph file")
    head = lines[0].split()
    sk = False
    if len(head) == 3 and head[2] == "sk":
        sk = True
    elif len(head) != 2:
        raise GraphFormatError(f"bad header: {lines[0]!r}")
    try:
        n, m = int(head[0]), int(head[1])
    except ValueError:
        raise GraphFormatError(f"bad header: {lines[0]!r}") from None
    body = lines[1:]
    if len(body) != m:
        raise GraphFormatError(f"expected {m} edge lines, found {len(body)}")
    edges = np.zeros((m, 2), dtype=np.int64)
    couplings = np.zeros(m, dtype=np.int64) if sk else None
    want = 3 if sk else 2
    for k, ln in enumerate(body):
        parts = ln.split()
        if len(parts) != want:
            raise GraphFormatError(f"bad edge line: {ln!r}")
        try:
            edges[k, 0] = int(parts[0])
            edges[k, 1] = int(parts[1])
            if sk:
                couplings[k] = int(parts[2])
        except ValueError:
            raise GraphFormatError(f"bad edge line: {ln!r}") from None
    try:
        return Graph(n, edges, couplings)
    except ValueError as exc:
        raise GraphFormatError(str(exc)) from None


# ----------------------------------------------------------------------
# bit strings
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class BitString:
    """A classical string with an explicit convention tag.

    values holds +-1 entries under the 'spin' tag and 0/1 entries under
    'binary'. Consumers check the tag instead of guessing.
    """

    values: np.ndarray
    convention: str

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.int8)
        object.__setattr__(self, "values", vals)
        if self.convention == SPIN:
            if not np.all(np.abs(vals) == 1):
                raise ConventionError("spin strings take values +-1")
        elif self.convention == BINARY:
            if not np.all((vals == 0) | (vals == 1)):
                raise ConventionError("binary strings take values 0/1")
        else:
            raise ConventionError(f"unknown convention {self.convention!r}")

    @property
    def n(self) -> int:
        return len(self.values)

    @classmethod
    def spins(cls, values) -> "BitString":
        return cls(np.asarray(values, dtype=np.int8), SPIN)

    @classmethod
    def bits(cls, values) -> "BitString":
        return cls(np.asarray(values, dtype=np.int8), BINARY)

    @classmethod
    def from_index(cls, index: int, n: int, convention: str = SPIN) -> "BitString":
        bits = (index >> (n - 1 - np.arange(n))) & 1
        if convention == SPIN:
            return cls.spins(1 - 2 * bits)
        return cls.bits(bits)

    def as_bits(self) -> np.ndarray:
        if self.convention == BINARY:
            return self.values.astype(np.int64)
        return ((1 - self.values.astype(np.int64)) // 2)

    def as_spins(self) -> np.ndarray:
        if self.convention == SPIN:
            return self.values.astype(np.int64)
        return 1 - 2 * self.values.astype(np.int64)

    def to_index(self) -> int:
        bits = self.as_bits()
        idx = 0
        for b in bits:
            idx = (idx << 1) | int(b)
        return idx

    def with_convention(self, convention: str) -> "BitString":
        if convention == self.convention:
            return self
        if convention == SPIN:
            return BitString.spins(self.as_spins())
        return BitString.bits(self.as_bits())

    def flip(self, i: int) -> "BitString":
        vals = self.values.copy()
        if self.convention == SPIN:
            vals[i] = -vals[i]
        else:
            vals[i] = 1 - vals[i]
        return BitString(vals, self.convention)

    def complement(self) -> "BitString":
        if self.convention == SPIN:
            return BitString(-self.values, SPIN)
        return BitString(1 - self.values, BINARY)

    def to_line(self) -> str:
        if self.convention == SPIN:
            return "".join("+" if v > 0 else "-" for v in self.values)
        return "".join(str(int(v)) for v in self.values)

    @classmethod
    def parse(cls, line: str) -> "BitString":
        line = line.strip()
        if not line:
            raise GraphFormatError("empty string line")
        if set(line) <= {"+", "-"}:
            return cls.spins([1 if c == "+" else -1 for c in line])
        if set(line) <= {"0", "1"}:
            return cls.bits([int(c) for c in line])
        raise GraphFormatError(f"unparsable string line: {line!r}")


def write_strings(strings: Iterable[BitString], path, meta: Optional[dict] = None) -> None:
    """String batch file: '# key=value ...' header lines, one string per line."""
    strings = list(strings)
    with open(path, "w") as fh:
        if meta:
            for key in meta:
                fh.write(f"# {key}={meta[key]}\n")
        for w in strings:
            fh.write(w.to_line() + "\n")


def read_strings(path) -> Tuple[List[BitString], dict]:
    meta = {}
    strings = []
    with open(path) as fh:
        for ln in fh:
            ln = ln.strip()
            if not ln:
                continue
            if ln.startswith("#"):
                body = ln[1:].strip()
                if "=" in body:
                    key, _, val = body.partition("=")
                    meta[key.strip()] = val.strip()
                continue
            strings.append(BitString.parse(ln))
    if strings:
        n = strings[0].n
        conv = strings[0].convention
        for w in strings:
            if w.n != n or w.convention != conv:
                raise GraphFormatError("inconsistent string batch")
    return strings, meta


# ----------------------------------------------------------------------
# cost functions
# ----------------------------------------------------------------------

MAXCUT = "maxcut"
ISING = "ising"
MIS = "mis"
SK = "sk"

_SPIN_KINDS = (MAXCUT, ISING, SK)


class CostFunction:
    """Classical cost to be maximized, tied to a graph.

    kinds:
      maxcut  C(z) = sum_e (1 - z_u z_v)/2      (cut size, spins)
      ising   C(z) = -sum_e z_u z_v             (2*maxcut - m, spins)
      mis     C(b) = sum_i b_i - sum_e b_u b_v  (independent-set relaxation, bits)
      sk      C(z) = sum_e J_e z_u z_v          (complete graph, spins)
    """

    def __init__(self, kind: str, graph: Graph):
        if kind not in (MAXCUT, ISING, MIS, SK):
            raise ValueError(f"unknown cost kind {kind!r}")
        if kind == SK and graph.J is None:
            raise ValueError("sk cost needs a graph with couplings")
        self.kind = kind
        self.graph = graph
        self._table = None

    # constructors mirroring the kinds
    @classmethod
    def maxcut(cls, graph):
        return cls(MAXCUT, graph)

    @classmethod
    def ising(cls, graph):
        return cls(ISING, graph)

    @classmethod
    def mis(cls, graph):
        return cls(MIS, graph)

    @classmethod
    def sk(cls, graph):
        return cls(SK, graph)

    @property
    def convention(self) -> str:
        return BINARY if self.kind == MIS else SPIN

    def check_convention(self, w: BitString) -> None:
        if w.convention != self.convention:
            raise ConventionError(
                f"{self.kind} cost expects {self.convention} strings, got {w.convention}")
        if w.n != self.graph.n:
            raise ValueError("string length does not match graph")

    def value(self, w: BitString) -> int:
        self.check_convention(w)
        g = self.graph
        u, v = g.edges[:, 0], g.edges[:, 1]
        if self.kind == MIS:
            b = w.values.astype(np.int64)
            return int(b.sum() - (b[u] * b[v]).sum())
        z = w.values.astype(np.int64)
        prods = z[u] * z[v]
        if self.kind == MAXCUT:
            return int((g.m - prods.sum()) // 2)
        if self.kind == ISING:
            return int(-prods.sum())
        return int((g.J * prods).sum())

    def cost_table(self, cap: int = ENUM_CAP) -> np.ndarray:
        """Costs of all 2^n strings, indexed big-endian. Cached."""
        n = self.graph.n
        if n > cap:
            raise CapacityError(f"enumeration over n={n} exceeds cap {cap}")
        if self._table is not None:
            return self._table
        size = 1 << n
        idx = np.arange(size, dtype=np.int64)
        total = np.zeros(size, dtype=np.int64)
        if self.kind == MIS:
            bit = [(idx >> (n - 1 - i)) & 1 for i in range(n)]
            for i in range(n):
                total += bit[i]
            for u, v in self.graph.edges:
                total -= bit[u] * bit[v]
        else:
            spin = [1 - 2 * ((idx >> (n - 1 - i)) & 1) for i in range(n)]
            for e, (u, v) in enumerate(self.graph.edges):
                prod = spin[u] * spin[v]
                if self.kind == MAXCUT:
                    total += (1 - prod) // 2
                elif self.kind == ISING:
                    total -= prod
                else:
                    total += int(self.graph.J[e]) * prod
        self._table = total
        return total

    def edge_terms(self) -> np.ndarray:
        """Per-edge term tables h[e, a, b] indexed by the endpoints' bits.

        Bit 0 means spin +1. The cost equals sum_e h_e exactly; for the MIS
        kind this folding requires a regular graph.
        """
        g = self.graph
        h = np.zeros((g.m, 2, 2), dtype=np.float64)
        if self.kind == MIS:
            d = g.degree  # raises on irregular graphs
            for a in (0, 1):
                for b in (0, 1):
                    h[:, a, b] = (a + b) / d - a * b
            return h
        for a in (0, 1):
            for b in (0, 1):
                s = (1 - 2 * a) * (1 - 2 * b)
                if self.kind == MAXCUT:
                    h[:, a, b] = (1 - s) / 2
                elif self.kind == ISING:
                    h[:, a, b] = -s
                else:
                    h[:, a, b] = g.J * s
        return h

    def ising_form(self):
        """(edge couplings c, vertex fields f, constant) with
        C(z) = sum_e c_e z_u z_v + sum_i f_i z_i + const, spins z."""
        g = self.graph
        c = np.zeros(g.m, dtype=np.float64)
        f = np.zeros(g.n, dtype=np.float64)
        const = 0.0
        if self.kind == MAXCUT:
            c[:] = -0.5
            const = g.m / 2
        elif self.kind == ISING:
            c[:] = -1.0
        elif self.kind == SK:
            c[:] = g.J
        else:  # mis via b = (1-z)/2
            c[:] = -0.25
            f[:] = g.degrees / 4 - 0.5
            const = g.n / 2 - g.m / 4
        return c, f, const

    def __repr__(self):
        return f"CostFunction({self.kind}, {self.graph!r})"


def flip_deltas(graph: Graph, w: BitString) -> np.ndarray:
    """delta_i = (C_i - C(w)) / 2 with respect to the ising cost C_Z.

    C_i is the cost after flipping bit i; the half-difference reduces to
    sum_{j ~ i} z_i z_j, so on a 3-regular graph |delta_i| is 1 or 3 and
    sum_i delta_i = -2 C_Z(w).
    """
    if w.convention != SPIN:
        raise ConventionError("flip deltas are defined on spin strings")
    if w.n != graph.n:
        raise ValueError("string length does not match graph")
    z = w.values.astype(np.int64)
    u, v = graph.edges[:, 0], graph.edges[:, 1]
    prods = z[u] * z[v]
    deltas = np.zeros(graph.n, dtype=np.int64)
    np.add.at(deltas, u, prods)
    np.add.at(deltas, v, prods)
    return deltas


def density_of_states(cost: CostFunction, cap: int = ENUM_CAP) -> dict:
    """Exact cost histogram {value: count} over all 2^n strings."""
    table = cost.cost_table(cap)
    values, counts = np.unique(table, return_counts=True)
    return {int(val): int(cnt) for val, cnt in zip(values, counts)}


def prune_to_independent_set(graph: Graph, w: BitString) -> BitString:
    """Drop conflicted vertices until the set is independent.

    Each round removes the in-set vertex with the most in-set neighbors
    (ties to the smallest index), which lowers the conflict count K by at
    least as much as the weight W, so the final independent set has size at
    least C(b) = W(b) - K(b).
    """
    if w.convention != BINARY:
        raise ConventionError("independent-set pruning expects binary strings")
    b = w.values.astype(np.int64).copy()
    while True:
        conflicts = np.zeros(graph.n, dtype=np.int64)
        for u, v in graph.edges:
            if b[u] and b[v]:
                conflicts[u] += 1
                conflicts[v] += 1
        worst = int(conflicts.argmax())
        if conflicts[worst] == 0:
            return BitString.bits(b)
        b[worst] = 0

"""Light-cone evaluation of warm-start circuits, one edge at a time.

At fractional depth p = k - 1/2 the Heisenberg-evolved observable of an
edge is supported on the radius-(k-1) ball around it, so each cost term
can be evaluated on the ball's induced subcircuit alone and the total
expectation is the sum over edges. Three numerically identical routes are
dispatched per edge:

* a closed factorization for balls whose interior (radius k-2) is the
  tree spanned from the edge: the outermost mixer layer traces out the
  boundary shell analytically, boundary factors collapse into per-parent
  child profiles, and identical (shape, local string) configurations are
  evaluated once;
* a general factorized contraction for arbitrary interiors up to
  _INNER_CAP qubits (handles short cycles through the interior);
* direct statevector simulation of the induced ball, the reference and
  fallback for everything else, capped at `cap` qubits.

Phase gates between two boundary vertices commute through the conjugated
observable and cancel, which is why the factorized routes never touch
them; the direct route keeps them, and agreement of the routes is part of
the test suite. Only the warm-start pattern is supported here - standard
circuits are run on the full statevector where they remain cheap.
"""

from dataclasses import dataclass, field

import numpy as np

from ._kernels import fact_eval_kernel, fast_group_kernel
from .errors import CapacityError
from .problems import SK, BitString, Graph
from .statevector import WARMSTART, apply_mixer, apply_phase, warmstart_params_for_p

LOCAL_CAP = 26

# factorized-route size guards; beyond these the direct route takes over
_INNER_CAP = 10
_PAR_CAP = 8
_SUB_CAP = 6
_SLOT_CAP = 6


@dataclass
class EdgeNeighborhood:
    """Induced ball of a given radius around one edge.

    Vertices are ordered canonically by (BFS level, parent position,
    vertex index) with the smaller endpoint of the center edge first, so
    two neighborhoods whose balls are trees of the same shape list their
    vertices in structurally matching order. local_edges rows are
    (position a, position b, global edge index) with a < b, sorted; the
    first row is always the center edge at positions (0, 1).
    """

    edge_index: int
    radius: int
    vertices: np.ndarray
    levels: np.ndarray
    parent_pos: np.ndarray
    local_edges: np.ndarray
    is_tree: bool

    @property
    def n_vertices(self):
        return int(self.vertices.size)

    def local_index(self, bits):
        """Big-endian basis index of a global 0/1 assignment on the ball."""
        sub = np.asarray(bits)[self.vertices]
        n = sub.size
        return int(sub @ (1 << np.arange(n - 1, -1, -1, dtype=np.int64)))


def _adj_lists(graph):
    lists = getattr(graph, "_adj_lists", None)
    if lists is None:
        lists = [
            graph.adj[graph.indptr[i]:graph.indptr[i + 1]].tolist()
            for i in range(graph.n)
        ]
        graph._adj_lists = lists
    return lists


def edge_neighborhood(graph, edge_index, radius):
    """Canonical radius-`radius` ball around edge `edge_index` (cached)."""
    key = (int(radius), int(edge_index))
    hit = graph._neighborhood_cache.get(key)
    if hit is not None:
        return hit
    adj = _adj_lists(graph)
    u = int(graph.edges[edge_index, 0])
    v = int(graph.edges[edge_index, 1])
    verts = [u, v]
    lev = [0, 0]
    par = [-1, -1]
    pos = {u: 0, v: 1}
    lo = 0
    for level in range(1, radius + 1):
        hi = len(verts)
        for q in range(lo, hi):
            for nb in adj[verts[q]]:
                if nb not in pos:
                    pos[nb] = len(verts)
                    verts.append(nb)
                    lev.append(level)
                    par.append(q)
        lo = hi
    ledges = []
    indptr, adj_flat, adj_edge = graph.indptr, graph.adj, graph.adj_edge
    for q, x in enumerate(verts):
        for t in range(int(indptr[x]), int(indptr[x + 1])):
            p = pos.get(int(adj_flat[t]))
            if p is not None and p > q:
                ledges.append((q, p, int(adj_edge[t])))
    ledges.sort()
    local_edges = np.array(ledges, dtype=np.int64).reshape(-1, 3)
    assert local_edges[0, 0] == 0 and local_edges[0, 1] == 1
    out = EdgeNeighborhood(
        edge_index=int(edge_index),
        radius=int(radius),
        vertices=np.array(verts, dtype=np.int64),
        levels=np.array(lev, dtype=np.int64),
        parent_pos=np.array(par, dtype=np.int64),
        local_edges=local_edges,
        is_tree=len(ledges) == len(verts) - 1,
    )
    graph._neighborhood_cache[key] = out
    return out


def all_neighborhoods(graph, radius):
    return [edge_neighborhood(graph, e, radius) for e in range(graph.m)]


def tree_fraction(graph, radius):
    """Fraction of edges whose radius-`radius` ball is a tree."""
    if graph.m == 0:
        return 1.0
    flags = [edge_neighborhood(graph, e, radius).is_tree for e in range(graph.m)]
    return float(np.mean(flags))


def average_cost_per_edge(cost):
    """Mean per-edge cost term under uniform random strings."""
    kind = cost.kind
    if kind == "maxcut":
        return 0.5
    if kind == "mis":
        return 1.0 / cost.graph.degree - 0.25
    return 0.0


def _popcounts(n):
    x = np.arange(n, dtype=np.int64)
    out = np.zeros(n, dtype=np.int64)
    while x.max(initial=0) > 0:
        out += x & 1
        x >>= 1
    return out


def _bit_matrix(n_bits):
    idx = np.arange(1 << n_bits, dtype=np.int64)
    shifts = np.arange(n_bits - 1, -1, -1, dtype=np.int64)
    return ((idx[:, None] >> shifts[None, :]) & 1).astype(np.int64)


def _rot_rows(M, q, c, isv):
    view = M.reshape((1 << q), 2, -1)
    a = view[:, 0, :].copy()
    b = view[:, 1, :]
    view[:, 0, :] = c * a + isv * b
    view[:, 1, :] = c * b + isv * a


def _rot_cols(M, q, n, c, isv):
    view = M.reshape((1 << (n + q)), 2, -1)
    a = view[:, 0, :].copy()
    b = view[:, 1, :]
    view[:, 0, :] = c * a + isv * b
    view[:, 1, :] = c * b + isv * a


def _conjugated_center(ce, cin, n_in, betas, gammas):
    """exp(i b_k B) ... C_e ... exp(-i b_k B) on the interior qubits.

    Only mixers on the center edge's endpoints survive the outermost
    layer; at k = 3 a full phase + mixer block follows. Index convention
    M[row, col] = <row| M |col>.
    """
    D = 1 << n_in
    M = np.zeros((D, D), dtype=np.complex128)
    np.fill_diagonal(M, ce)
    k = len(betas)
    c, s = np.cos(betas[-1]), np.sin(betas[-1])
    for q in (0, 1):
        _rot_rows(M, q, c, 1j * s)
        _rot_cols(M, q, n_in, c, -1j * s)
    if k == 3:
        ph = np.exp(1j * gammas[1] * cin)
        M *= ph[:, None]
        M *= np.conj(ph)[None, :]
        c, s = np.cos(betas[1]), np.sin(betas[1])
        for q in range(n_in):
            _rot_rows(M, q, c, 1j * s)
            _rot_cols(M, q, n_in, c, -1j * s)
    return M


def _amp_coeffs(beta, n):
    # amplitude product of e^{-i beta X} factors with j bits flipped
    j = np.arange(n + 1)
    return (np.cos(beta) ** (n - j)) * ((-1j * np.sin(beta)) ** j)


@dataclass
class _FastGroup:
    r: int
    n_in: int
    S: int
    PP: int
    cin: np.ndarray
    ce: np.ndarray
    h_c: np.ndarray
    pcPP: np.ndarray
    pc4: np.ndarray
    combo_map: dict = field(default_factory=dict)
    code_map: dict = field(default_factory=dict)
    kid_map: dict = field(default_factory=dict)
    hval_map: dict = field(default_factory=dict)
    tree_counts: dict = field(default_factory=dict)
    nt_entries: list = field(default_factory=list)
    # finalized arrays
    var_arr: np.ndarray = None
    pl_inv: np.ndarray = None
    plu: np.ndarray = None
    kcodes: np.ndarray = None
    code_sk: np.ndarray = None
    tu_combo: np.ndarray = None
    tu_kid: np.ndarray = None
    tu_count: np.ndarray = None
    nt_combo: np.ndarray = None
    nt_kid: np.ndarray = None
    nt_ptr: np.ndarray = None
    mp_sub: np.ndarray = None
    mp_phidx: np.ndarray = None
    mp_npat: np.ndarray = None
    hvals: np.ndarray = None

    def combo_id(self, var, pl):
        return self.combo_map.setdefault((var, pl), len(self.combo_map))

    def code_id(self, s, kk):
        return self.code_map.setdefault((s, kk), len(self.code_map))

    def kid_id(self, kprof):
        return self.kid_map.setdefault(kprof, len(self.kid_map))

    def hval_id(self, val):
        return self.hval_map.setdefault(round(float(val), 12), len(self.hval_map))


@dataclass
class _GeneralGroup:
    n_in: int
    cin: np.ndarray
    ce: np.ndarray
    pcD: np.ndarray
    edges: list = field(default_factory=list)
    lin: np.ndarray = None
    pcode: np.ndarray = None
    subidx: np.ndarray = None
    Hpat: np.ndarray = None
    n_out: np.ndarray = None


@dataclass
class _DirectEdge:
    n_loc: int
    lidx: int
    ctab: np.ndarray
    cetab: np.ndarray


class LocalEvaluator:
    """Callable mapping flat warm-start angles to the cost expectation.

    Precomputes all per-edge structure for a fixed (graph, cost, string,
    depth) once; each call then runs the per-edge routes. Angle layout is
    [b1, g1, b2, g2, ...] as produced by QaoaParams.flat().
    """

    def __init__(self, graph, cost, w, p, cap=LOCAL_CAP, method="auto"):
        if method not in ("auto", "direct", "factorized"):
            raise ValueError(f"unknown method {method!r}")
        cost.check_convention(w)
        k, _ = warmstart_params_for_p(p)
        self.p = float(p)
        self.pattern = WARMSTART
        self.num_angles = 2 * k - 1
        self._k = k
        r = k - 1
        self._graph = graph
        self._cost = cost
        wb = w.as_bits().astype(np.int64)
        h_all = cost.edge_terms()
        uniform_h = cost.kind != SK
        h_c = np.array(h_all[0], dtype=np.float64) if graph.m else None

        fast_groups = {}
        general_groups = {}
        direct_edges = []
        counts = {"fast_tree": 0, "fast_shared": 0, "general": 0, "direct": 0}

        for e in range(graph.m):
            nb = edge_neighborhood(graph, e, r)
            n_loc = nb.n_vertices
            if n_loc > cap:
                raise CapacityError(
                    f"edge {e}: neighborhood has {n_loc} qubits, cap is {cap}"
                )
            if method == "direct" or r == 0 or r > 2:
                if method == "factorized":
                    raise ValueError(
                        "factorized route needs half-integral p with k in (2, 3)"
                    )
                direct_edges.append(self._build_direct(nb, h_all, wb))
                counts["direct"] += 1
                continue

            n_in = int(np.searchsorted(nb.levels, r))
            inner_edges = []
            outer_adj = {}
            for a, b, eid in nb.local_edges:
                a, b, eid = int(a), int(b), int(eid)
                if b < n_in:
                    inner_edges.append((a, b, eid))
                elif a < n_in:
                    outer_adj.setdefault(b, []).append((a, eid))
                # boundary-boundary edges cancel in the conjugated observable

            placed = False
            if uniform_h:
                placed = self._try_fast(
                    fast_groups, nb, r, n_in, inner_edges, outer_adj, wb, h_c, counts
                )
            if not placed:
                n_par = len({a for lst in outer_adj.values() for a, _ in lst})
                ok = (
                    n_in <= _INNER_CAP
                    and n_par <= _PAR_CAP
                    and all(len(lst) <= _SUB_CAP for lst in outer_adj.values())
                )
                if ok:
                    self._add_general(
                        general_groups, nb, n_in, inner_edges, outer_adj, wb, h_all
                    )
                    counts["general"] += 1
                elif method == "factorized":
                    raise ValueError(f"edge {e}: factorized route unavailable")
                else:
                    direct_edges.append(self._build_direct(nb, h_all, wb))
                    counts["direct"] += 1

        self._fast_groups = [self._finalize_fast(g) for g in fast_groups.values()]
        self._general_groups = [
            self._finalize_general(g) for g in general_groups.values()
        ]
        self._direct_edges = direct_edges
        self.path_counts = counts

    # -- route construction -------------------------------------------------

    def _edge_table(self, h_all, nb, rows):
        """Cost table on the ball for the given local-edge rows."""
        n_loc = nb.n_vertices
        t = np.zeros(1 << n_loc, dtype=np.float64)
        verts = nb.vertices
        for a, b, eid in rows:
            h = h_all[eid]
            if verts[a] > verts[b]:
                h = h.T
            view = t.reshape((1 << a), 2, (1 << (b - a - 1)), 2, -1)
            view += h[None, :, None, :, None]
        return t

    def _build_direct(self, nb, h_all, wb):
        rows = [(int(a), int(b), int(eid)) for a, b, eid in nb.local_edges]
        ctab = self._edge_table(h_all, nb, rows)
        cetab = self._edge_table(h_all, nb, rows[:1])
        return _DirectEdge(
            n_loc=nb.n_vertices,
            lidx=nb.local_index(wb),
            ctab=ctab,
            cetab=cetab,
        )

    def _try_fast(self, groups, nb, r, n_in, inner_edges, outer_adj, wb, h_c, counts):
        if len(inner_edges) != n_in - 1:
            return False
        if r == 1:
            S = 2
            slot_at = lambda a: a
            sa = sb = 1
        else:
            S = n_in - 2
            if S > _SLOT_CAP:
                return False
            slot_at = lambda a: a - 2
            slot_parents = nb.parent_pos[2:n_in]
            if np.any(slot_parents > 1):
                return False
            sa = int(np.sum(slot_parents == 0))
            sb = S - sa
        if any(len(lst) > _SUB_CAP for lst in outer_adj.values()):
            return False
        if any(r == 2 and a < 2 for lst in outer_adj.values() for a, _ in lst):
            return False

        key = (r, sa, sb)
        g = groups.get(key)
        if g is None:
            g = self._new_fast_group(r, n_in, S, sa, h_c)
            groups[key] = g

        verts = nb.vertices
        var = int(wb[verts[0]] << 1 | wb[verts[1]])
        if r == 1:
            plbits = [int(wb[verts[0]]), int(wb[verts[1]])]
        else:
            plbits = [int(wb[verts[q]]) for q in range(2, n_in)]
        s_cnt = [0] * S
        k_cnt = [0] * S
        mps = []
        for q in sorted(outer_adj):
            lst = outer_adj[q]
            if len(lst) == 1:
                j = slot_at(lst[0][0])
                s_cnt[j] += 1
                k_cnt[j] += int(wb[verts[q]])
            else:
                js = tuple(slot_at(a) for a, _ in lst)
                mps.append((js, int(wb[verts[q]])))

        if not mps:
            # canonical order inside each root side, then the sides
            # themselves when symmetric, to merge isomorphic configs
            if r == 1:
                side_a = [(s_cnt[0], k_cnt[0], plbits[0])]
                side_b = [(s_cnt[1], k_cnt[1], plbits[1])]
            else:
                side_a = sorted(
                    (s_cnt[j], k_cnt[j], plbits[j]) for j in range(sa)
                )
                side_b = sorted(
                    (s_cnt[j], k_cnt[j], plbits[j]) for j in range(sa, S)
                )
            bit_a, bit_b = var >> 1, var & 1
            if sa == sb and (bit_b, side_b) < (bit_a, side_a):
                bit_a, bit_b = bit_b, bit_a
                side_a, side_b = side_b, side_a
            var = bit_a << 1 | bit_b
            ordered = side_a + side_b
            plbits = [t[2] for t in ordered]
            kprof = tuple(g.code_id(t[0], t[1]) for t in ordered)
            pl = 0
            for b in plbits:
                pl = pl << 1 | b
            combo = g.combo_id(var, pl)
            kid = g.kid_id(kprof)
            g.tree_counts[(combo, kid)] = g.tree_counts.get((combo, kid), 0) + 1
            counts["fast_tree"] += 1
        else:
            kprof = tuple(g.code_id(s_cnt[j], k_cnt[j]) for j in range(S))
            pl = 0
            for b in plbits:
                pl = pl << 1 | b
            combo = g.combo_id(var, pl)
            kid = g.kid_id(kprof)
            g.nt_entries.append((combo, kid, mps))
            counts["fast_shared"] += 1
        return True

    def _new_fast_group(self, r, n_in, S, sa, h_c):
        bits = _bit_matrix(n_in)
        ce = h_c[bits[:, 0], bits[:, 1]].astype(np.float64)
        cin = ce.copy()
        if r == 2:
            for j in range(S):
                parent = 0 if j < sa else 1
                cin = cin + h_c[bits[:, parent], bits[:, 2 + j]]
        return _FastGroup(
            r=r,
            n_in=n_in,
            S=S,
            PP=1 << S,
            cin=cin,
            ce=ce,
            h_c=h_c,
            pcPP=_popcounts(1 << S),
            pc4=_popcounts(4),
        )

    def _finalize_fast(self, g):
        combos = sorted(g.combo_map.items(), key=lambda kv: kv[1])
        g.var_arr = np.array([var for (var, _), _ in combos], dtype=np.int64)
        pls = np.array([pl for (_, pl), _ in combos], dtype=np.int64)
        g.plu, g.pl_inv = np.unique(pls, return_inverse=True)
        g.pl_inv = g.pl_inv.astype(np.int64)
        g.code_sk = np.array(
            [sk for sk, _ in sorted(g.code_map.items(), key=lambda kv: kv[1])],
            dtype=np.int64,
        ).reshape(-1, 2)
        kprofs = sorted(g.kid_map.items(), key=lambda kv: kv[1])
        g.kcodes = np.array([list(kp) for kp, _ in kprofs], dtype=np.int64).reshape(
            len(kprofs), g.S
        )
        tu = sorted(g.tree_counts.items())
        g.tu_combo = np.array([c for (c, _), _ in tu], dtype=np.int64)
        g.tu_kid = np.array([k for (_, k), _ in tu], dtype=np.int64)
        g.tu_count = np.array([cnt for _, cnt in tu], dtype=np.float64)

        nt_combo, nt_kid, ptr = [], [], [0]
        sub_rows, ph_rows, npat_rows = [], [], []
        sp_max = 1
        for _, _, mps in g.nt_entries:
            for js, _ in mps:
                sp_max = max(sp_max, 1 << len(js))
        codes = np.arange(g.PP, dtype=np.int64)
        for combo, kid, mps in g.nt_entries:
            nt_combo.append(combo)
            nt_kid.append(kid)
            for js, wbit in mps:
                nv = len(js)
                sub = np.zeros(g.PP, dtype=np.int64)
                for t, j in enumerate(js):
                    sub |= ((codes >> (g.S - 1 - j)) & 1) << (nv - 1 - t)
                pats = _bit_matrix(nv)
                ph = np.zeros((2, sp_max), dtype=np.int64)
                for u in (0, 1):
                    bv = wbit if u == 0 else 1 - wbit
                    hv = g.h_c[pats, bv].sum(axis=1)
                    for i, val in enumerate(hv):
                        ph[u, i] = g.hval_id(val)
                sub_rows.append(sub)
                ph_rows.append(ph)
                npat_rows.append(1 << nv)
            ptr.append(ptr[-1] + len(mps))
        g.nt_combo = np.array(nt_combo, dtype=np.int64)
        g.nt_kid = np.array(nt_kid, dtype=np.int64)
        g.nt_ptr = np.array(ptr, dtype=np.int64)
        if sub_rows:
            g.mp_sub = np.stack(sub_rows)
            g.mp_phidx = np.stack(ph_rows)
            g.mp_npat = np.array(npat_rows, dtype=np.int64)
        else:
            g.mp_sub = np.zeros((0, g.PP), dtype=np.int64)
            g.mp_phidx = np.zeros((0, 2, 1), dtype=np.int64)
            g.mp_npat = np.zeros(0, dtype=np.int64)
        vals = sorted(g.hval_map.items(), key=lambda kv: kv[1])
        g.hvals = np.array([v for v, _ in vals], dtype=np.float64)
        if g.hvals.size == 0:
            g.hvals = np.zeros(1, dtype=np.float64)
        return g

    def _add_general(self, groups, nb, n_in, inner_edges, outer_adj, wb, h_all):
        verts = nb.vertices
        bits = _bit_matrix(n_in)
        cin = np.zeros(1 << n_in, dtype=np.float64)
        for a, b, eid in inner_edges:
            h = h_all[eid]
            if verts[a] > verts[b]:
                h = h.T
            cin += h[bits[:, a], bits[:, b]]
        a0, b0, e0 = inner_edges[0]
        assert (a0, b0) == (0, 1)
        h = h_all[e0]
        if verts[0] > verts[1]:
            h = h.T
        ce = h[bits[:, 0], bits[:, 1]].astype(np.float64)
        key = (n_in, cin.tobytes(), ce.tobytes())
        g = groups.get(key)
        if g is None:
            g = _GeneralGroup(n_in=n_in, cin=cin, ce=ce, pcD=_popcounts(1 << n_in))
            groups[key] = g
        par_pos = sorted({a for lst in outer_adj.values() for a, _ in lst})
        slot_of = {a: j for j, a in enumerate(par_pos)}
        n_par = len(par_pos)
        codes = np.zeros(1 << n_in, dtype=np.int64)
        for j, a in enumerate(par_pos):
            codes |= bits[:, a] << (n_par - 1 - j)
        pp_codes = np.arange(1 << n_par, dtype=np.int64)
        lin = int(wb[verts[:n_in]] @ (1 << np.arange(n_in - 1, -1, -1)))
        overts = []
        for q in sorted(outer_adj):
            lst = outer_adj[q]
            nv = len(lst)
            sub = np.zeros(1 << n_par, dtype=np.int64)
            for t, (a, _) in enumerate(lst):
                j = slot_of[a]
                sub |= ((pp_codes >> (n_par - 1 - j)) & 1) << (nv - 1 - t)
            pats = _bit_matrix(nv)
            H = np.zeros((2, 1 << nv), dtype=np.float64)
            for u in (0, 1):
                bv = int(wb[verts[q]]) if u == 0 else 1 - int(wb[verts[q]])
                acc = np.zeros(1 << nv, dtype=np.float64)
                for t, (a, eid) in enumerate(lst):
                    h = h_all[eid]
                    if verts[a] > verts[q]:
                        h = h.T
                    acc += h[pats[:, t], bv]
                H[u] = acc
            overts.append((sub, H))
        g.edges.append((lin, codes, n_par, overts))
        return g

    def _finalize_general(self, g):
        E = len(g.edges)
        D = 1 << g.n_in
        PP = max(1 << n_par for _, _, n_par, _ in g.edges)
        V = max(1, max(len(ov) for _, _, _, ov in g.edges))
        SP = 1
        for _, _, _, ov in g.edges:
            for _, H in ov:
                SP = max(SP, H.shape[1])
        g.lin = np.array([lin for lin, _, _, _ in g.edges], dtype=np.int64)
        g.pcode = np.zeros((E, D), dtype=np.int64)
        g.subidx = np.zeros((E, V, PP), dtype=np.int64)
        g.Hpat = np.zeros((E, V, 2, SP), dtype=np.float64)
        g.n_out = np.zeros(E, dtype=np.int64)
        for i, (_, codes, n_par, ov) in enumerate(g.edges):
            g.pcode[i] = codes
            g.n_out[i] = len(ov)
            for v, (sub, H) in enumerate(ov):
                g.subidx[i, v, : sub.size] = sub
                g.Hpat[i, v, :, : H.shape[1]] = H
        g.edges = None
        return g

    # -- evaluation ----------------------------------------------------------

    def __call__(self, angles):
        a = np.asarray(angles, dtype=np.float64).ravel()
        if a.size != self.num_angles:
            raise ValueError(
                f"expected {self.num_angles} angles, got {a.size}"
            )
        betas = a[0::2]
        gammas = a[1::2]
        total = 0.0
        for g in self._fast_groups:
            total += self._eval_fast(g, betas, gammas)
        for g in self._general_groups:
            total += self._eval_general(g, betas, gammas)
        for d in self._direct_edges:
            total += self._eval_direct(d, betas, gammas)
        return float(total)

    def _eval_fast(self, g, betas, gammas):
        return fast_group_kernel(
            g.r, self._k, g.n_in, g.S,
            g.ce, g.cin, g.h_c,
            g.var_arr, g.plu, g.pl_inv, g.kcodes, g.code_sk,
            g.tu_combo, g.tu_kid, g.tu_count,
            g.nt_combo, g.nt_kid, g.nt_ptr,
            g.mp_sub, g.mp_phidx, g.mp_npat, g.hvals,
            g.pcPP, g.pc4, betas, gammas,
        )

    def _eval_general(self, g, betas, gammas):
        b1, g1 = betas[0], gammas[0]
        cb, sbv = np.cos(b1), np.sin(b1)
        M = _conjugated_center(g.ce, g.cin, g.n_in, betas, gammas)
        P = np.exp(-1j * g1 * g.cin)
        amp = _amp_coeffs(b1, g.n_in)
        Av = np.exp(-1j * g1 * g.Hpat)
        vals = fact_eval_kernel(
            M, P, amp, g.pcD, g.lin, g.pcode, Av, g.subidx, g.n_out,
            cb * cb, sbv * sbv,
        )
        return float(vals.sum())

    def _eval_direct(self, d, betas, gammas):
        state = np.zeros(1 << d.n_loc, dtype=np.complex128)
        state[d.lidx] = 1.0
        apply_mixer(state, betas[0], d.n_loc)
        for j in range(self._k - 1):
            apply_phase(state, gammas[j], d.ctab)
            apply_mixer(state, betas[j + 1], d.n_loc)
        probs = np.abs(state) ** 2
        return float(probs @ d.cetab)


def local_expectation(graph, cost, w, params, cap=LOCAL_CAP, method="auto"):
    """Cost expectation of a warm-start circuit via per-edge light cones."""
    if params.pattern != WARMSTART:
        raise ValueError("local evaluation supports the warm-start pattern only")
    ev = LocalEvaluator(graph, cost, w, params.p, cap=cap, method=method)
    return ev(params.flat())

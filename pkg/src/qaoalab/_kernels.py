"""Numba kernels for the hot loops.

Everything here is an implementation detail of localsim / warmstart; the
callers own all precomputation and the kernels stay branch-light. Results
are deterministic for fixed inputs and seeds.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def fact_eval_kernel(M, Pphase, amp, pc, lin, pcode, Av, subidx, n_out, c2, s2):
    """General factorized evaluation of one edge group.

    For edge e the conjugated center observable gives
      f_e = sum_{x,y} M[y,x] psi_e[x] conj(psi_e[y]) prod_v g_v(x, y)
    with psi_e[x] = Pphase[x] * amp[popcount(x ^ lin[e])] and boundary
    factors g_v depending on (x, y) only through each vertex's interior
    neighbor bits. The double sum is accumulated into parent-code blocks
    first so the boundary product runs over at most PP^2 cells.

    M       (D, D)       conjugated observable, shared by the group
    Pphase  (D,)         interior phase exp(-i g1 Cin), shared
    amp     (n_in + 1,)  mixer product coefficients by flip count
    pc      (D,)         popcount lookup
    lin     (E,)         interior basis index of the warm string per edge
    pcode   (E, D)       parent-code of each interior config per edge
    Av      (E, V, 2, S) boundary phases exp(-i g1 H_v) over sub-patterns;
                         index 0 of axis 2 means "boundary bit equals w's"
    subidx  (E, V, PP)   sub-pattern of each parent-code per boundary vertex
    n_out   (E,)         boundary vertex count per edge
    c2, s2               cos^2(b1), sin^2(b1)
    """
    E, D = pcode.shape
    PP = subidx.shape[2]
    out = np.empty(E, np.float64)
    Gt = np.empty((PP, PP), np.complex128)
    for e in range(E):
        le = lin[e]
        for a in range(PP):
            for b in range(PP):
                Gt[a, b] = 0.0 + 0.0j
        for x in range(D):
            px = pcode[e, x]
            wx = Pphase[x] * amp[pc[x ^ le]]
            for y in range(D):
                Gt[px, pcode[e, y]] += wx * np.conj(Pphase[y] * amp[pc[y ^ le]]) * M[y, x]
        acc = 0.0 + 0.0j
        for a in range(PP):
            for b in range(PP):
                t = Gt[a, b]
                if t == 0.0 + 0.0j:
                    continue
                g = 1.0 + 0.0j
                for v in range(n_out[e]):
                    a0 = Av[e, v, 0, subidx[e, v, a]]
                    b0 = Av[e, v, 0, subidx[e, v, b]]
                    a1 = Av[e, v, 1, subidx[e, v, a]]
                    b1 = Av[e, v, 1, subidx[e, v, b]]
                    g *= c2 * (a0 * np.conj(b0)) + s2 * (a1 * np.conj(b1))
                acc += t * g
        out[e] = acc.real
    return out


@njit(cache=True)
def build_k_kernel(slotmats, kcodes):
    """Tensor products of per-slot 2x2 boundary factors.

    K[t][a, b] = prod_j slotmats[kcodes[t, j]][bit_j(a), bit_j(b)] with
    slot j sitting at bit position S-1-j of the parent code. Built by
    doubling so no bit extraction is needed.
    """
    NK, S = kcodes.shape
    PP = 1 << S
    K = np.empty((NK, PP, PP), np.complex128)
    cur = np.empty((PP, PP), np.complex128)
    nxt = np.empty((PP, PP), np.complex128)
    for t in range(NK):
        cur[0, 0] = 1.0 + 0.0j
        size = 1
        for j in range(S):
            m = slotmats[kcodes[t, j]]
            for a in range(size):
                for b in range(size):
                    v = cur[a, b]
                    nxt[2 * a, 2 * b] = v * m[0, 0]
                    nxt[2 * a, 2 * b + 1] = v * m[0, 1]
                    nxt[2 * a + 1, 2 * b] = v * m[1, 0]
                    nxt[2 * a + 1, 2 * b + 1] = v * m[1, 1]
            size *= 2
            tmp = cur
            cur = nxt
            nxt = tmp
        for a in range(PP):
            for b in range(PP):
                K[t, a, b] = cur[a, b]
    return K


@njit(cache=True)
def fast_eval_kernel(T, K, tu_combo, tu_kid, tu_count,
                     nt_combo, nt_kid, nt_ptr,
                     mp_sub, mp_phidx, mp_npat, philut, c2, s2):
    """Deduped near-tree evaluation: sum of per-edge center expectations.

    Tree-like edges collapse to unique (combo, kid) pairs with counts;
    edges whose boundary has shared-parent vertices carry those vertices'
    factors explicitly (mp_* arrays, ranged by nt_ptr).

    T (NC, PP, PP) interior quadratic form per used (variant, parent-bits)
    K (NK, PP, PP) boundary tensor products per used child profile
    """
    PP = T.shape[1]
    total = 0.0
    for t in range(tu_combo.shape[0]):
        Tc = T[tu_combo[t]]
        Kc = K[tu_kid[t]]
        acc = 0.0 + 0.0j
        for a in range(PP):
            for b in range(PP):
                acc += Tc[a, b] * Kc[a, b]
        total += tu_count[t] * acc.real
    E = nt_combo.shape[0]
    if E > 0:
        SP = mp_phidx.shape[2]
        maxmp = 1
        for e in range(E):
            c = nt_ptr[e + 1] - nt_ptr[e]
            if c > maxmp:
                maxmp = c
        gv = np.empty((maxmp, SP, SP), np.complex128)
        for e in range(E):
            lo = nt_ptr[e]
            nmp = nt_ptr[e + 1] - lo
            for v in range(nmp):
                npat = mp_npat[lo + v]
                for sa in range(npat):
                    a0 = philut[mp_phidx[lo + v, 0, sa]]
                    a1 = philut[mp_phidx[lo + v, 1, sa]]
                    for sb in range(npat):
                        b0 = philut[mp_phidx[lo + v, 0, sb]]
                        b1 = philut[mp_phidx[lo + v, 1, sb]]
                        gv[v, sa, sb] = c2 * (a0 * np.conj(b0)) + s2 * (a1 * np.conj(b1))
            Tc = T[nt_combo[e]]
            Kc = K[nt_kid[e]]
            acc = 0.0 + 0.0j
            for a in range(PP):
                for b in range(PP):
                    g = Tc[a, b] * Kc[a, b]
                    for v in range(nmp):
                        g *= gv[v, mp_sub[lo + v, a], mp_sub[lo + v, b]]
                    acc += g
            total += acc.real
    return total


@njit(cache=True)
def _rot_rows(M, D, mask, c, is_):
    for i in range(D):
        if i & mask:
            continue
        j = i | mask
        for t in range(D):
            a = M[i, t]
            b = M[j, t]
            M[i, t] = c * a + is_ * b
            M[j, t] = c * b + is_ * a


@njit(cache=True)
def _rot_cols(M, D, mask, c, is_):
    for i in range(D):
        if i & mask:
            continue
        j = i | mask
        for t in range(D):
            a = M[t, i]
            b = M[t, j]
            M[t, i] = c * a + is_ * b
            M[t, j] = c * b + is_ * a


@njit(cache=True)
def fast_group_kernel(r, k, n_in, S,
                      ce, cin, h_c,
                      var_arr, plu, pl_inv, kcodes, code_sk,
                      tu_combo, tu_kid, tu_count,
                      nt_combo, nt_kid, nt_ptr,
                      mp_sub, mp_phidx, mp_npat, hvals,
                      pcPP, pc4, betas, gammas):
    """One full evaluation of a near-tree edge group.

    Builds the conjugated center observable (root mixers, then at k = 3
    the inner phase + mixer block), folds in the first phase layer,
    reduces root qubits against the warm-string variants (r = 2), forms
    the interior quadratic forms T and the boundary tensor products K,
    and sums the deduped configurations. Equivalent to the numpy
    composition in localsim._eval_fast but with the per-call overhead of
    a dozen small array ops collapsed into one jitted pass.
    """
    D = 1 << n_in
    PP = 1 << S
    b1 = betas[0]
    g1 = gammas[0]
    cb = np.cos(b1)
    sb = np.sin(b1)
    c2 = cb * cb
    s2 = sb * sb

    M = np.zeros((D, D), np.complex128)
    for i in range(D):
        M[i, i] = ce[i]
    c = np.cos(betas[k - 1])
    s = np.sin(betas[k - 1])
    for q in range(2):
        mask = 1 << (n_in - 1 - q)
        _rot_rows(M, D, mask, c, 1j * s)
        _rot_cols(M, D, mask, c, -1j * s)
    if k == 3:
        ph = np.empty(D, np.complex128)
        for i in range(D):
            ph[i] = np.exp(1j * gammas[1] * cin[i])
        for i in range(D):
            pi = ph[i]
            for j in range(D):
                M[i, j] = M[i, j] * pi * np.conj(ph[j])
        c = np.cos(betas[1])
        s = np.sin(betas[1])
        for q in range(n_in):
            mask = 1 << (n_in - 1 - q)
            _rot_rows(M, D, mask, c, 1j * s)
            _rot_cols(M, D, mask, c, -1j * s)
    P = np.empty(D, np.complex128)
    for i in range(D):
        P[i] = np.exp(-1j * g1 * cin[i])
    for i in range(D):
        pi = np.conj(P[i])
        for j in range(D):
            M[i, j] = M[i, j] * pi * P[j]

    ampS = np.empty(S + 1, np.complex128)
    v = 1.0 + 0.0j
    for j in range(S + 1):
        ampS[j] = v * cb ** (S - j)
        v = v * (-1j * sb)
    NP = plu.shape[0]
    wv = np.empty((NP, PP), np.complex128)
    for i in range(NP):
        pl = plu[i]
        for x in range(PP):
            wv[i, x] = ampS[pcPP[x ^ pl]]
    NC = var_arr.shape[0]
    T = np.empty((NC, PP, PP), np.complex128)
    if r == 2:
        amp2 = np.empty(3, np.complex128)
        v = 1.0 + 0.0j
        for j in range(3):
            amp2[j] = v * cb ** (2 - j)
            v = v * (-1j * sb)
        R = np.zeros((4, PP, PP), np.complex128)
        for var in range(4):
            for a in range(4):
                ua = amp2[pc4[a ^ var]]
                for b in range(4):
                    uw = ua * np.conj(amp2[pc4[b ^ var]])
                    for q in range(PP):
                        row = b * PP + q
                        for p in range(PP):
                            R[var, p, q] += M[row, a * PP + p] * uw
        for ci in range(NC):
            Rv = R[var_arr[ci]]
            wr = wv[pl_inv[ci]]
            for x in range(PP):
                wx = wr[x]
                for y in range(PP):
                    T[ci, x, y] = Rv[x, y] * wx * np.conj(wr[y])
    else:
        for ci in range(NC):
            wr = wv[pl_inv[ci]]
            for x in range(PP):
                wx = wr[x]
                for y in range(PP):
                    T[ci, x, y] = M[y, x] * wx * np.conj(wr[y])

    ph2 = np.empty((2, 2), np.complex128)
    for x in range(2):
        for bbit in range(2):
            ph2[x, bbit] = np.exp(-1j * g1 * h_c[x, bbit])
    G = np.empty((2, 2, 2), np.complex128)
    for cbit in range(2):
        for x in range(2):
            for y in range(2):
                G[cbit, x, y] = (
                    c2 * ph2[x, cbit] * np.conj(ph2[y, cbit])
                    + s2 * ph2[x, 1 - cbit] * np.conj(ph2[y, 1 - cbit])
                )
    NS = code_sk.shape[0]
    slotmats = np.empty((NS, 2, 2), np.complex128)
    for i in range(NS):
        s_ = code_sk[i, 0]
        kk = code_sk[i, 1]
        for x in range(2):
            for y in range(2):
                g = 1.0 + 0.0j
                for _ in range(kk):
                    g = g * G[1, x, y]
                for _ in range(s_ - kk):
                    g = g * G[0, x, y]
                slotmats[i, x, y] = g
    K = build_k_kernel(slotmats, kcodes)
    philut = np.empty(hvals.shape[0], np.complex128)
    for i in range(hvals.shape[0]):
        philut[i] = np.exp(-1j * g1 * hvals[i])
    return fast_eval_kernel(T, K, tu_combo, tu_kid, tu_count,
                            nt_combo, nt_kid, nt_ptr,
                            mp_sub, mp_phidx, mp_npat, philut, c2, s2)


@njit(cache=True)
def metropolis_kernel(indptr, adj, adj_edge, coup, fields, spins, t_inv, n_updates, seed):
    """Single-site Metropolis on C(z) = sum_e c_e z_u z_v + sum_i f_i z_i.

    Targets the distribution proportional to exp(C(z)/T); a flip of spin i
    changes the cost by dC = -2 z_i (sum_{j~i} c_ij z_j + f_i) and is
    accepted with probability min(1, exp(dC/T)). Mutates spins in place.
    """
    np.random.seed(seed)
    n = spins.shape[0]
    for _ in range(n_updates):
        i = np.random.randint(0, n)
        local = 0.0
        for k in range(indptr[i], indptr[i + 1]):
            local += coup[adj_edge[k]] * spins[adj[k]]
        d_cost = -2.0 * spins[i] * (local + fields[i])
        if d_cost >= 0.0 or np.random.random() < np.exp(d_cost * t_inv):
            spins[i] = -spins[i]
    return spins

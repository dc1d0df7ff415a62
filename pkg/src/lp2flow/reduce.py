"""The nine forward reductions LP -> LEN -> 2-LEN -> 1-LEN -> FHF -> FPHF
-> SFF -> 2CFF -> 2CFR -> 2CF.

Every reduction returns (target_instance, Trace).  Ids in the target are
assigned by index arithmetic in a fixed order, so equal inputs give
identical outputs.  The graph stages are vectorised with numpy; the
algebraic stages walk the sparse triples once.
"""
import numpy as np

from ._arith import absmax, ceil_log2, floor_log2, frozen, int_array, obj_array
from .model import (FhfInstance, FlowGraph, FphfInstance, KLenInstance,
                    LenInstance, LpInstance, SffInstance, SparseIntMatrix,
                    TwoCffInstance, TwoCfInstance, TwoCfrInstance, _Value,
                    compute_X, validate)

STAGES = ("lp-len", "len-2len", "2len-1len", "1len-fhf", "fhf-fphf",
          "fphf-sff", "sff-2cff", "2cff-2cfr", "2cfr-2cf")


class TriviallyInfeasible(ValueError):
    """An equation 0 = b with b != 0 was found; no graph can encode it."""

    def __init__(self, rows):
        self.rows = list(rows)
        super().__init__(f"trivially infeasible: rows {self.rows[:10]} are zero with nonzero rhs")


class Trace(_Value):
    """Per-stage bookkeeping linking source coordinates to target ids."""
    _fields = ("stage", "data")

    def __init__(self, stage, data):
        if stage not in STAGES:
            raise ValueError(f"unknown stage {stage!r}")
        self.stage = stage
        self.data = {}
        for k, v in data.items():
            if isinstance(v, np.ndarray) and v.dtype != object:
                v = frozen(v.astype(np.int64, copy=False))
            self.data[k] = v

    def __getitem__(self, key):
        return self.data[key]


def _mask(ids, size):
    m = np.zeros(size, dtype=bool)
    m[np.asarray(ids, dtype=np.int64)] = True
    return m


def _objfill(size, value):
    out = np.empty(size, dtype=object)
    out[:] = [value] * size if size < 64 else value
    return out


# ------------------------------------------------------------------ bits

def binary_representation(z):
    """Return (sign, exponents) with z = sign * sum(2**l) and exponents
    strictly decreasing."""
    z = int(z)
    sign = (z > 0) - (z < 0)
    r = abs(z)
    out = []
    while r > 0:
        l = r.bit_length() - 1
        out.append(l)
        r -= 1 << l
    return sign, out


# -------------------------------------------------------------- LP -> LEN

def lp_to_len(lp):
    """Add slacks s and alpha:  [c^T 0 -1; A I 0] (x, s, alpha) = (K, b)."""
    errs = validate(lp)
    if errs:
        raise ValueError("invalid LP: " + "; ".join(errs))
    A, n, m = lp.A, lp.n, lp.m
    c = lp.c.tolist()
    cj = [j for j in range(n) if c[j] != 0]
    rows = [0] * len(cj) + [0] + (A.rows + 1).tolist() + list(range(1, m + 1))
    cols = cj + [n + m] + A.cols.tolist() + list(range(n, n + m))
    vals = [c[j] for j in cj] + [-1] + A.vals.tolist() + [1] * m
    At = SparseIntMatrix.from_arrays(m + 1, n + m + 1, rows, cols, obj_array(vals))
    X = max(compute_X(lp.A, lp.b, lp.c, lp.K), 1)
    Rt = 5 * max(m, 1) * lp.R * X
    out = LenInstance(At, [lp.K] + lp.b.tolist(), Rt)
    tr = Trace("lp-len", {"n": n, "m": m, "X": X})
    return out, tr


# ------------------------------------------------------------ LEN -> 2-LEN

def _bit_layout(A, b):
    """N_q per row (0 for an all-zero row with zero rhs)."""
    N = []
    for q in range(A.m):
        lo, hi = A.row_bounds(q)
        big = max(absmax(A.vals[lo:hi]), abs(b[q]))
        N.append(floor_log2(big) if big else 0)
    return N


def len_to_2len(inst):
    """Bitwise decomposition with carry pairs (c - d) and bounded carries."""
    errs = validate(inst)
    if errs:
        raise ValueError("invalid LEN: " + "; ".join(errs))
    A, b = inst.A, inst.b.tolist()
    n, m = A.n, A.m
    X = max(compute_X(A, inst.b), 1)
    delta = 2 * X * inst.R
    N = _bit_layout(A, b)
    C = sum(N)
    carry_start = np.concatenate([[0], np.cumsum(N)]).astype(np.int64)
    cvar, dvar, scvar, sdvar = n, n + C, n + 2 * C, n + 3 * C
    rows, cols, vals, rhs = [], [], [], []
    row_start = []
    r = 0
    for q in range(m):
        Nq = N[q]
        lo, hi = A.row_bounds(q)
        js = A.cols[lo:hi].tolist()
        vs = A.vals[lo:hi].tolist()
        sb, bbits = binary_representation(b[q])
        bset = set(bbits)
        k0 = int(carry_start[q])
        row_start.append(r)
        per_bit = [[] for _ in range(Nq + 1)]
        for j, v in zip(js, vs):
            s, bits = binary_representation(v)
            for l in bits:
                per_bit[l].append((j, s))
        for l in range(Nq + 1):
            for j, s in per_bit[l]:
                rows.append(r); cols.append(j); vals.append(s)
            if l >= 1:
                k = k0 + l - 1
                rows += [r, r]; cols += [cvar + k, dvar + k]; vals += [1, -1]
            if l < Nq:
                k = k0 + l
                rows += [r, r]; cols += [cvar + k, dvar + k]; vals += [-2, 2]
            rhs.append(sb if l in bset else 0)
            r += 1
        for i in range(Nq):
            k = k0 + i
            rows += [r, r]; cols += [cvar + k, scvar + k]; vals += [1, 1]
            rhs.append(delta)
            r += 1
            rows += [r, r]; cols += [dvar + k, sdvar + k]; vals += [1, 1]
            rhs.append(delta)
            r += 1
    Ab = SparseIntMatrix.from_arrays(r, n + 4 * C, rows, cols, obj_array(vals))
    Rb = 8 * m * inst.R * X * (1 + ceil_log2(X))
    out = KLenInstance(Ab, rhs, Rb, 2)
    tr = Trace("len-2len", {
        "n_in": n, "m_in": m, "N": np.asarray(N, dtype=np.int64),
        "row_start": np.asarray(row_start, dtype=np.int64),
        "carry_start": carry_start, "carries": C, "delta": delta, "X": X,
    })
    return out, tr


# ----------------------------------------------------------- 2-LEN -> 1-LEN

def twolen_to_onelen(inst):
    """Replace every +-2 x(j) by +-(x(j) + x'(j)) and add x(j) - x'(j) = 0."""
    errs = validate(inst)
    if errs:
        raise ValueError("invalid 2-LEN: " + "; ".join(errs))
    if not isinstance(inst, KLenInstance) or inst.k > 2:
        if inst.A.absmax() > 2:
            raise ValueError("twolen_to_onelen needs coefficients in [-2, 2]")
    A = inst.A
    n, m = A.n, A.m
    v = np.array(A.vals.tolist(), dtype=np.int64)
    two = np.abs(v) == 2
    split = np.unique(A.cols[two])
    twin = np.full(n, -1, dtype=np.int64)
    twin[split] = n + np.arange(len(split))
    sgn = np.sign(v)
    r1 = A.rows
    c1 = A.cols
    v1 = np.where(two, sgn, v)
    r2 = A.rows[two]
    c2 = twin[A.cols[two]]
    v2 = sgn[two]
    k = np.arange(len(split))
    r3 = np.concatenate([m + k, m + k])
    c3 = np.concatenate([split, n + k])
    v3 = np.concatenate([np.ones(len(k), np.int64), -np.ones(len(k), np.int64)])
    rows = np.concatenate([r1, r2, r3])
    cols = np.concatenate([c1, c2, c3])
    vals = obj_array(np.concatenate([v1, v2, v3]).tolist())
    Ah = SparseIntMatrix.from_arrays(m + len(split), n + len(split), rows, cols, vals)
    bh = inst.b.tolist() + [0] * len(split)
    out = KLenInstance(Ah, bh, 2 * inst.R, 1)
    tr = Trace("2len-1len", {"n_in": n, "m_in": m, "split": split.astype(np.int64)})
    return out, tr


# -------------------------------------------------------------- 1-LEN -> FHF

def onelen_to_fhf(inst):
    """One section per equation: J+ and J- fed from s by variable edges,
    drained to t by a fixed edge of value b and a homologous pair e+, e-."""
    errs = validate(inst)
    if errs:
        raise ValueError("invalid 1-LEN: " + "; ".join(errs))
    A = inst.A
    if A.absmax() > 1:
        raise ValueError("onelen_to_fhf needs coefficients in {-1, 0, 1}")
    n, m = A.n, A.m
    Rh = inst.R
    b = inst.b.tolist()
    cnt = np.diff(A._rowptr)
    bad = [i for i in range(m) if cnt[i] == 0 and b[i] != 0]
    if bad:
        raise TriviallyInfeasible(bad)
    keep = np.flatnonzero(cnt > 0)
    sec_of_row = np.full(m, -1, dtype=np.int64)
    sec_of_row[keep] = np.arange(len(keep))
    nsec = len(keep)
    bk = [b[i] for i in keep.tolist()]
    flip = np.array([x < 0 for x in bk], dtype=bool)
    babs = [abs(x) for x in bk]
    hasb = np.array([x != 0 for x in babs], dtype=bool)
    kcnt = cnt[keep]
    per = kcnt + hasb.astype(np.int64) + 2
    off = np.concatenate([[0], np.cumsum(per)]).astype(np.int64)
    E = int(off[-1])

    tail = np.empty(E, dtype=np.int64)
    head = np.empty(E, dtype=np.int64)
    cap = np.empty(E, dtype=object)

    # variable edges
    sec = sec_of_row[A.rows]
    pos = np.arange(A.nnz) - A._rowptr[A.rows]
    vid = off[sec] + pos
    coef = np.array(A.vals.tolist(), dtype=np.int64)
    coef = np.where(flip[sec], -coef, coef)
    tail[vid] = 0
    head[vid] = np.where(coef > 0, 2 + 2 * sec, 3 + 2 * sec)
    cap[vid] = Rh
    # fixed edges
    ks = np.arange(nsec)
    bid = np.where(hasb, off[:-1] + kcnt, -1)
    hb = bid[hasb]
    tail[hb] = 2 + 2 * ks[hasb]
    head[hb] = 1
    if len(hb):
        cap[hb] = obj_array([babs[k] for k in ks[hasb].tolist()])
    # homologous pair
    ep = off[:-1] + kcnt + hasb
    em = ep + 1
    tail[ep] = 2 + 2 * ks
    tail[em] = 3 + 2 * ks
    head[ep] = 1
    head[em] = 1
    cap[ep] = Rh
    cap[em] = Rh

    order = np.argsort(A.cols, kind="stable")
    var_edges = vid[order]
    var_ptr = np.searchsorted(A.cols[order], np.arange(n + 1))
    sizes = np.diff(var_ptr)
    sets = [var_edges[var_ptr[j]:var_ptr[j + 1]] for j in np.flatnonzero(sizes >= 2).tolist()]
    sets += [np.array([a, c]) for a, c in zip(ep.tolist(), em.tolist())]
    g = FlowGraph(2 + 2 * nsec, tail, head, cap, copy=False)
    out = FhfInstance(g, hb, sets, 0, 1)
    tr = Trace("1len-fhf", {
        "n_in": n, "m_in": m, "rows": keep.astype(np.int64), "flip": flip.astype(np.int64),
        "var_ptr": var_ptr.astype(np.int64), "var_edges": var_edges.astype(np.int64),
        "b_edge": bid.astype(np.int64), "e_plus": ep.astype(np.int64),
        "e_minus": em.astype(np.int64),
    })
    return out, tr


# --------------------------------------------------------------- FHF -> FPHF

def fhf_to_fphf(inst):
    """Chain each homologous set h1..hk into k-1 pairs, splitting interior
    members with a fresh vertex.  The first half keeps the old id."""
    errs = validate(inst)
    if errs:
        raise ValueError("invalid FHF: " + "; ".join(errs))
    g = inst.graph
    sets = [h for h in inst.homologous if len(h) >= 2]
    if sets:
        flat = np.concatenate(sets).astype(np.int64)
        sizes = np.array([len(h) for h in sets], dtype=np.int64)
    else:
        flat = np.zeros(0, np.int64)
        sizes = np.zeros(0, np.int64)
    ptr = np.concatenate([[0], np.cumsum(sizes)]).astype(np.int64)
    sid = np.repeat(np.arange(len(sets)), sizes)
    p = np.arange(len(flat))
    first = p == ptr[sid]
    last = p == ptr[sid + 1] - 1
    inner = ~first & ~last
    split = flat[inner]
    ns = len(split)
    second = g.m + np.arange(ns)
    z = g.n + np.arange(ns)

    tail = np.concatenate([g.tail, z])
    head = np.concatenate([g.head, g.head[split]])
    head[split] = z
    cap = np.concatenate([g.cap, g.cap[split]])
    second_of = np.full(len(flat), -1, dtype=np.int64)
    second_of[inner] = second
    src = np.where(first, flat, second_of)
    a = src[~last]
    bpos = np.flatnonzero(~last) + 1
    pairs = np.stack([a, flat[bpos]], axis=1) if len(a) else np.zeros((0, 2), np.int64)
    out = FphfInstance(FlowGraph(g.n + ns, tail, head, cap, copy=False),
                       inst.fixed, pairs, inst.s, inst.t)
    tr = Trace("fhf-fphf", {"m_in": g.m, "n_in": g.n, "split": split, "second": second})
    return out, tr


# --------------------------------------------------------------- FPHF -> SFF

def fphf_to_sff(inst):
    """Replace each pair {e=(v,w), f=(y,z)} by the nine-edge gadget driven by
    a second commodity s2 -> t2.  Other edges are copied as commodity-1
    selective edges."""
    errs = validate(inst)
    if errs:
        raise ValueError("invalid FPHF: " + "; ".join(errs))
    g = inst.graph
    P = inst.pairs
    p = len(P)
    e, f = P[:, 0], P[:, 1]
    u = g.cap[e]
    if p and any(x != y for x, y in zip(u.tolist(), g.cap[f].tolist())):
        raise ValueError("paired edges must share one capacity")
    inpair = _mask(P.reshape(-1), g.m)
    copied = np.flatnonzero(~inpair)
    c = len(copied)
    E = c + 9 * p
    s2, t2 = g.n, g.n + 1
    base = g.n + 2 + 4 * np.arange(p)
    vw, vw2, yz, yz2 = base, base + 1, base + 2, base + 3
    tail = np.empty(E, np.int64)
    head = np.empty(E, np.int64)
    cap = np.empty(E, dtype=object)
    tail[:c] = g.tail[copied]
    head[:c] = g.head[copied]
    cap[:c] = g.cap[copied]
    gid = c + 9 * np.arange(p)[:, None] + np.arange(9)[None, :]
    S2 = np.full(p, s2)
    T2 = np.full(p, t2)
    # e1, e2, e3, e4, e5, f1, f2, f4, f5
    tails = [g.tail[e], vw2, S2, vw, vw2, g.tail[f], yz2, yz, yz2]
    heads = [vw, g.head[e], vw, vw2, yz, yz, g.head[f], yz2, T2]
    for j in range(9):
        tail[gid[:, j]] = tails[j]
        head[gid[:, j]] = heads[j]
        cap[gid[:, j]] = u
    newid = np.full(g.m, -1, np.int64)
    newid[copied] = np.arange(c)
    fixed_copied = newid[inst.fixed]
    fixed = np.concatenate([fixed_copied, gid[:, 3], gid[:, 7]])
    S1 = np.concatenate([np.arange(c), gid[:, [0, 1, 5, 6]].reshape(-1)])
    S2set = gid[:, [2, 4, 8]].reshape(-1)
    out = SffInstance(FlowGraph(g.n + 2 + 4 * p, tail, head, cap, copy=False),
                      fixed, S1, S2set, inst.s, inst.t, s2, t2)
    tr = Trace("fphf-sff", {"m_in": g.m, "copied": copied, "pairs": P.reshape(-1),
                            "gadget": gid.reshape(-1)})
    return out, tr


# --------------------------------------------------------------- SFF -> 2CFF

def sff_to_2cff(inst):
    """Replace each selective edge e=(x,y) in S_i by the five-edge gadget
    e1=(x,xy), e2=(xy',xy), e3=(xy',y), e4=(xy,t_i), e5=(s_i,xy'); e2 is
    left out when e is fixed."""
    errs = validate(inst)
    if errs:
        raise ValueError("invalid SFF: " + "; ".join(errs))
    g = inst.graph
    com = np.zeros(g.m, np.int64)
    com[inst.S1] = 1
    com[inst.S2] = 2
    fx = _mask(inst.fixed, g.m)
    sel = com > 0
    per = np.where(sel, np.where(fx, 4, 5), 1)
    off = np.concatenate([[0], np.cumsum(per)]).astype(np.int64)
    E = int(off[-1])
    tail = np.empty(E, np.int64)
    head = np.empty(E, np.int64)
    cap = np.empty(E, dtype=object)
    plain = np.flatnonzero(~sel)
    tail[off[plain]] = g.tail[plain]
    head[off[plain]] = g.head[plain]
    cap[off[plain]] = g.cap[plain]
    S = np.flatnonzero(sel)
    k = len(S)
    xy = g.n + 2 * np.arange(k)
    xy2 = xy + 1
    o = off[S]
    isfx = fx[S]
    has2 = ~isfx
    e1 = o
    e2 = np.where(has2, o + 1, -1)
    e3 = o + 1 + has2
    e4 = e3 + 1
    e5 = e3 + 2
    si = np.where(com[S] == 1, inst.s1, inst.s2)
    ti = np.where(com[S] == 1, inst.t1, inst.t2)
    u = g.cap[S]
    for ids, tl, hd in ((e1, g.tail[S], xy), (e3, xy2, g.head[S]), (e4, xy, ti), (e5, si, xy2)):
        tail[ids] = tl
        head[ids] = hd
        cap[ids] = u
    h2 = e2[has2]
    tail[h2] = xy2[has2]
    head[h2] = xy[has2]
    cap[h2] = u[has2]
    fixed = np.concatenate([off[np.flatnonzero(fx & ~sel)], e4, e5, e1[isfx], e3[isfx]])
    out = TwoCffInstance(FlowGraph(g.n + 2 * k, tail, head, cap, copy=False), fixed,
                         inst.s1, inst.t1, inst.s2, inst.t2)
    gad = np.stack([e1, e2, e3, e4, e5], axis=1) if k else np.zeros((0, 5), np.int64)
    tr = Trace("sff-2cff", {"m_in": g.m, "first": off[:-1], "selective": S,
                            "commodity": com[S], "gadget": gad.reshape(-1), "m_out": E})
    return out, tr


# -------------------------------------------------------------- 2CFF -> 2CFR

def twocff_to_2cfr(inst):
    """Seven-edge gadget per edge plus a terminal gadget per commodity; the
    requirements R_i = 2 M^f force every fixed edge to carry its capacity."""
    errs = validate(inst)
    if errs:
        raise ValueError("invalid 2CFF: " + "; ".join(errs))
    g = inst.graph
    m, nv = g.m, g.n
    Mf = int(np.sum(g.cap)) if m else 0
    fx = _mask(inst.fixed, m)
    k = np.arange(m)
    xy = nv + 2 * k
    xy2 = xy + 1
    sb1, tb1, sb2, tb2 = nv + 2 * m, nv + 2 * m + 1, nv + 2 * m + 2, nv + 2 * m + 3
    z1, z1p, z2, z2p = nv + 2 * m + 4, nv + 2 * m + 5, nv + 2 * m + 6, nv + 2 * m + 7
    E = 7 * m + 10
    tail = np.empty(E, np.int64)
    head = np.empty(E, np.int64)
    cap = np.empty(E, dtype=object)
    u = g.cap
    u2 = np.where(fx, u, u * 2) if m else u
    cols = (
        (g.tail, xy, u), (xy2, xy, u2), (xy2, g.head, u),
        (xy, np.full(m, tb1), u), (xy, np.full(m, tb2), u),
        (np.full(m, sb1), xy2, u), (np.full(m, sb2), xy2, u),
    )
    for j, (tl, hd, cp) in enumerate(cols):
        tail[j:7 * m:7] = tl
        head[j:7 * m:7] = hd
        cap[j:7 * m:7] = cp
    term = []
    for i, (s, t, sb, tb, z, zp) in enumerate(((inst.s1, inst.t1, sb1, tb1, z1, z1p),
                                               (inst.s2, inst.t2, sb2, tb2, z2, z2p))):
        base = 7 * m + 5 * i
        # (t_i, z_i), (z'_i, s_i), (z'_i, z_i), (sbar_i, z'_i), (z_i, tbar_i)
        for j, (a, b_) in enumerate(((t, z), (zp, s), (zp, z), (sb, zp), (z, tb))):
            tail[base + j] = a
            head[base + j] = b_
            cap[base + j] = Mf
        term.append(list(range(base, base + 5)))
    out = TwoCfrInstance(FlowGraph(nv + 2 * m + 8, tail, head, cap, copy=False),
                         sb1, tb1, sb2, tb2, 2 * Mf, 2 * Mf)
    tr = Trace("2cff-2cfr", {"m_in": m, "n_in": nv, "Mf": Mf,
                             "terminal": np.asarray(term, dtype=np.int64).reshape(-1),
                             "s": np.asarray([inst.s1, inst.s2]), "t": np.asarray([inst.t1, inst.t2])})
    return out, tr


# --------------------------------------------------------------- 2CFR -> 2CF

def twocfr_to_2cf(inst):
    """New sources feeding the old ones through edges of capacity R_i."""
    errs = validate(inst)
    if errs:
        raise ValueError("invalid 2CFR: " + "; ".join(errs))
    g = inst.graph
    if inst.R1 <= 0 or inst.R2 <= 0:
        raise ValueError("2CFR -> 2CF needs positive requirements (edge capacities)")
    ss1, ss2 = g.n, g.n + 1
    tail = np.concatenate([g.tail, [ss1, ss2]])
    head = np.concatenate([g.head, [inst.s1, inst.s2]])
    cap = np.concatenate([g.cap, obj_array([inst.R1, inst.R2])])
    out = TwoCfInstance(FlowGraph(g.n + 2, tail, head, cap, copy=False),
                        ss1, inst.t1, ss2, inst.t2, inst.R1 + inst.R2)
    tr = Trace("2cfr-2cf", {"m_in": g.m, "new_edges": np.asarray([g.m, g.m + 1])})
    return out, tr


REDUCERS = {
    "lp-len": lp_to_len, "len-2len": len_to_2len, "2len-1len": twolen_to_onelen,
    "1len-fhf": onelen_to_fhf, "fhf-fphf": fhf_to_fphf, "fphf-sff": fphf_to_sff,
    "sff-2cff": sff_to_2cff, "2cff-2cfr": twocff_to_2cfr, "2cfr-2cf": twocfr_to_2cf,
}

SOURCE_CLASS = {
    "lp-len": "lp", "len-2len": "len", "2len-1len": "klen", "1len-fhf": "klen",
    "fhf-fphf": "fhf", "fphf-sff": "fphf", "sff-2cff": "sff", "2cff-2cfr": "2cff",
    "2cfr-2cf": "2cfr",
}
TARGET_CLASS = {
    "lp-len": "len", "len-2len": "klen", "2len-1len": "klen", "1len-fhf": "fhf",
    "fhf-fphf": "fphf", "fphf-sff": "sff", "sff-2cff": "2cff", "2cff-2cfr": "2cfr",
    "2cfr-2cf": "2cf",
}


def reduce_stage(stage, inst):
    return REDUCERS[stage](inst)


def reduce_all(lp):
    """Run the whole chain; returns (instances, traces) with instances[0] = lp."""
    insts, traces = [lp], []
    cur = lp
    for st in STAGES:
        cur, tr = REDUCERS[st](cur)
        insts.append(cur)
        traces.append(tr)
    return insts, traces

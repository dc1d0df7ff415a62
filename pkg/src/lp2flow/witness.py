"""Forward witnesses: exact source solution -> exact target solution.

Each builder follows the feasibility half of the matching size/correctness
argument for its stage.  Inputs must be exactly feasible; anything else is
refused, since near-feasible points belong to map_back, not here.
"""
from fractions import Fraction

import numpy as np

from ._arith import norm, obj_array, zeros_obj
from .model import NonnegVector, TwoCommodityFlow, as_flow, as_vector
from .reduce import STAGES
from .verify import check, class_of


class WitnessError(ValueError):
    pass


def _require_exact(inst, sol):
    ok, rep = check(class_of(inst), inst, sol, 0)
    if not ok:
        raise WitnessError(f"source solution is not exactly feasible: {rep.summary()}")


def _carry_split(g):
    return (g if g > 0 else 0), (-g if g < 0 else 0)


def _lp_len(lp, x, tr):
    x = as_vector(x).values
    s = lp.b - lp.A.matvec(x)
    alpha = sum((lp.c * x).tolist()) - lp.K
    return NonnegVector(np.concatenate([x, s, obj_array([norm(alpha)])]))


def _len_2len(inst, x, tr):
    """Net carries g_l = c_l - d_l from the lowest bit upward:
    g_l = (sum of bit-l terms + g_{l-1} - rhs_l) / 2."""
    x = as_vector(x).values
    A, b = inst.A, inst.b.tolist()
    N, cs, C = tr["N"].tolist(), tr["carry_start"].tolist(), tr["carries"]
    delta = tr["delta"]
    carries = [0] * C
    for q in range(A.m):
        Nq = N[q]
        if Nq == 0:
            continue
        lo, hi = A.row_bounds(q)
        bits = [0] * (Nq + 1)
        for j, v in zip(A.cols[lo:hi].tolist(), A.vals[lo:hi].tolist()):
            a, sgn = abs(v), (1 if v > 0 else -1)
            l = 0
            while a:
                if a & 1:
                    bits[l] += sgn * x[j]
                a >>= 1
                l += 1
        bq = abs(b[q])
        sb = 1 if b[q] > 0 else -1
        g = 0
        for l in range(Nq):
            rhs = sb if (bq >> l) & 1 else 0
            g = norm(Fraction(bits[l] + g - rhs, 2))
            carries[cs[q] + l] = g
    c = [_carry_split(g)[0] for g in carries]
    d = [_carry_split(g)[1] for g in carries]
    sc = [delta - v for v in c]
    sd = [delta - v for v in d]
    if any(v < 0 for v in sc + sd):
        raise WitnessError("a carry exceeds the carry bound; the solution leaves the radius")
    return NonnegVector(np.concatenate([x, obj_array(c + d + sc + sd)]))


def _2len_1len(inst, x, tr):
    x = as_vector(x).values
    return NonnegVector(np.concatenate([x, x[tr["split"]]]))


def _1len_fhf(inst, x, fhf):
    x = as_vector(x).values
    A = inst.A
    tr = fhf
    m = int(tr["var_edges"].max()) + 1 if len(tr["var_edges"]) else 0
    E = max(m, int(tr["e_minus"].max()) + 1 if len(tr["e_minus"]) else 0)
    f = zeros_obj(E)
    order_cols = np.repeat(np.arange(A.n), np.diff(tr["var_ptr"]))
    f[tr["var_edges"]] = x[order_cols]
    # sum over the J- side of every kept row (sign already flipped)
    rows = tr["rows"]
    flip = tr["flip"].astype(bool)
    sec_of_row = np.full(A.m, -1, dtype=np.int64)
    sec_of_row[rows] = np.arange(len(rows))
    vals = np.array(A.vals.tolist(), dtype=np.int64)
    sec = sec_of_row[A.rows]
    neg = np.where(flip[sec], vals > 0, vals < 0)
    jminus = zeros_obj(len(rows))
    np.add.at(jminus, sec[neg], x[A.cols[neg]])
    f[tr["e_plus"]] = jminus
    f[tr["e_minus"]] = jminus
    b = inst.b
    has = tr["b_edge"] >= 0
    f[tr["b_edge"][has]] = np.array([abs(v) for v in b[rows[has]].tolist()], dtype=object)
    return TwoCommodityFlow(f)


def _fhf_fphf(inst, flow, tr):
    f = as_flow(flow).f1
    return TwoCommodityFlow(np.concatenate([f, f[tr["split"]]]))


def _fphf_sff(inst, flow, tr):
    f = as_flow(flow).f1
    cap = inst.graph.cap
    copied = tr["copied"]
    P = tr["pairs"].reshape(-1, 2)
    gid = tr["gadget"].reshape(-1, 9)
    c = len(copied)
    E = c + 9 * len(P)
    f1, f2 = zeros_obj(E), zeros_obj(E)
    f1[:c] = f[copied]
    if len(P):
        x = f[P[:, 0]]
        rest = cap[P[:, 0]] - x
        # e1 e2 e3 e4 e5 | e^1 e^2 e^4 e^5
        for j in (0, 1, 3, 5, 6, 7):
            f1[gid[:, j]] = x
        for j in (2, 3, 4, 7, 8):
            f2[gid[:, j]] = rest
    return TwoCommodityFlow(f1, f2)


def _sff_2cff(inst, flow, tr):
    fl = as_flow(flow)
    g = inst.graph
    fs1, fs2 = fl.f1, fl.f2 if fl.f2 is not None else zeros_obj(g.m)
    first = tr["first"]
    S = tr["selective"]
    com = tr["commodity"]
    gad = tr["gadget"].reshape(-1, 5)
    E = int(gad.max()) + 1 if len(gad) else 0
    E = max(E, int(first.max()) + 1 if len(first) else 0)
    f1, f2 = zeros_obj(E), zeros_obj(E)
    sel = np.zeros(g.m, dtype=bool)
    sel[S] = True
    plain = np.flatnonzero(~sel)
    f1[first[plain]] = fs1[plain]
    f2[first[plain]] = fs2[plain]
    u = g.cap[S]
    for i, (fs, fo) in ((1, (fs1, f1)), (2, (fs2, f2))):
        mine = com == i
        if not mine.any():
            continue
        x = fs[S[mine]]
        gm = gad[mine]
        um = u[mine]
        fo[gm[:, 0]] = x
        fo[gm[:, 2]] = x
        fo[gm[:, 3]] = um
        fo[gm[:, 4]] = um
        has2 = gm[:, 1] >= 0
        fo[gm[has2, 1]] = um[has2] - x[has2]
    return TwoCommodityFlow(f1, f2)


def _2cff_2cfr(inst, flow, tr):
    fl = as_flow(flow)
    g = inst.graph
    m = g.m
    a = fl.f1
    b = fl.f2 if fl.f2 is not None else zeros_obj(m)
    u = g.cap
    Mf = tr["Mf"]
    E = 7 * m + 10
    f1, f2 = zeros_obj(E), zeros_obj(E)
    f1[0:7 * m:7], f2[0:7 * m:7] = a, b
    f1[1:7 * m:7], f2[1:7 * m:7] = u - a, u - b
    f1[2:7 * m:7], f2[2:7 * m:7] = a, b
    f1[3:7 * m:7] = u
    f2[4:7 * m:7] = u
    f1[5:7 * m:7] = u
    f2[6:7 * m:7] = u
    for i, (fs, fo) in enumerate(((a, f1), (b, f2))):
        s, t = (inst.s1, inst.t1) if i == 0 else (inst.s2, inst.t2)
        net = g.outflow(fs)[s] - g.inflow(fs)[s]
        if net < 0 or net > Mf:
            raise WitnessError(f"commodity {i + 1} net source outflow {net} outside [0, M^f]")
        base = 7 * m + 5 * i
        fo[base + 0] = net
        fo[base + 1] = net
        fo[base + 2] = Mf - net
        fo[base + 3] = Mf
        fo[base + 4] = Mf
    return TwoCommodityFlow(f1, f2)


def _2cfr_2cf(inst, flow, tr):
    fl = as_flow(flow)
    a = fl.f1
    b = fl.f2 if fl.f2 is not None else zeros_obj(len(a))
    f1 = np.concatenate([a, obj_array([inst.R1, 0])])
    f2 = np.concatenate([b, obj_array([0, inst.R2])])
    return TwoCommodityFlow(f1, f2)


_BUILDERS = {
    "lp-len": _lp_len, "len-2len": _len_2len, "2len-1len": _2len_1len,
    "1len-fhf": _1len_fhf, "fhf-fphf": _fhf_fphf, "fphf-sff": _fphf_sff,
    "sff-2cff": _sff_2cff, "2cff-2cfr": _2cff_2cfr, "2cfr-2cf": _2cfr_2cf,
}


def construct_witness(stage, inst_a, sol_a, trace, check_input=True):
    """Exact stage-B solution built from an exact stage-A solution."""
    if stage not in _BUILDERS:
        raise ValueError(f"unknown stage {stage!r}")
    if trace.stage != stage:
        raise ValueError(f"trace belongs to {trace.stage}, not {stage}")
    if check_input:
        _require_exact(inst_a, sol_a)
    return _BUILDERS[stage](inst_a, sol_a, trace)


def witness_chain(lp, x, traces, instances=None, check_input=True):
    """Compose the nine witnesses.  Returns the 2CF flow; with `instances`
    (the list from reduce_all) every intermediate source is the real one,
    otherwise the instances are rebuilt from the traces' stages."""
    if instances is None:
        from .reduce import reduce_all
        instances, _ = reduce_all(lp)
    sols = witness_all(lp, x, traces, instances, check_input)
    return sols[-1]


def witness_all(lp, x, traces, instances, check_input=True):
    """All ten solutions, one per instance, from x upward."""
    sols = [as_vector(x)]
    if len(traces) != len(STAGES):
        raise ValueError("need one trace per stage")
    for k, (st, tr) in enumerate(zip(STAGES, traces)):
        # only the LP input is checked; later inputs are exact by construction
        sols.append(construct_witness(st, instances[k], sols[-1], tr,
                                      check_input=check_input and k == 0))
    return sols

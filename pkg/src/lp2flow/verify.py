"""Achieved-error computation for every approximate problem class.

check() evaluates each inequality of a class definition exactly and reports
the largest violation per error notion together with where it happened.
Nothing here uses a tolerance: pass means every notion is <= eps as
rationals.
"""
import copy
from fractions import Fraction
from math import lcm

import numpy as np

from ._arith import common_denominator, fmt, norm, rat, scaled
from .model import (FhfInstance, FlowGraph, FphfInstance, KLenInstance, LenInstance,
                    LpInstance, NonnegVector, SffInstance, TwoCffInstance,
                    TwoCfInstance, TwoCfrInstance, TwoCommodityFlow, _Value,
                    as_flow, as_vector)

CLASSES = ("lpa", "lena", "klena", "fhfa", "fphfa", "sffa", "2cffa", "2cfra", "2cfa")

_INSTANCE = {
    "lpa": LpInstance, "lena": LenInstance, "klena": KLenInstance,
    "fhfa": FhfInstance, "fphfa": FphfInstance, "sffa": SffInstance,
    "2cffa": TwoCffInstance, "2cfra": TwoCfrInstance, "2cfa": TwoCfInstance,
}

# which notions exist for which class (absent ones are omitted from reports)
NOTIONS = {
    "lpa": ("constraint", "objective"),
    "lena": ("constraint",),
    "klena": ("constraint",),
    "fhfa": ("congestion_upper", "congestion_lower", "demand", "homology"),
    "fphfa": ("congestion_upper", "congestion_lower", "demand", "homology"),
    "sffa": ("congestion_upper", "congestion_lower", "demand", "type"),
    "2cffa": ("congestion_upper", "congestion_lower", "demand"),
    "2cfra": ("congestion_upper", "demand", "requirement"),
    "2cfa": ("congestion_upper", "demand", "requirement"),
}


def class_of(inst):
    """Approximate-problem class name matching an instance type."""
    for name in ("klena", "lpa", "lena", "fphfa", "fhfa", "sffa", "2cffa", "2cfra", "2cfa"):
        if type(inst) is _INSTANCE[name]:
            return name
    raise TypeError(f"no problem class for {type(inst).__name__}")


class ErrorReport(_Value):
    """Largest achieved error per notion, with its location, against eps."""
    _fields = ("problem", "eps", "tau", "where", "flags")

    def __init__(self, problem, eps, tau, where=None, flags=()):
        self.problem = problem
        self.eps = rat(eps)
        self.tau = {k: norm(v) for k, v in tau.items()}
        self.where = dict(where or {})
        self.flags = tuple(flags)

    @property
    def worst(self):
        return max(self.tau.values()) if self.tau else 0

    @property
    def passed(self):
        return all(v <= self.eps for v in self.tau.values())

    @property
    def exact(self):
        return all(v == 0 for v in self.tau.values())

    def summary(self):
        parts = [f"{k}={fmt(v)}" for k, v in sorted(self.tau.items())]
        head = "PASS" if self.passed else "FAIL"
        return f"{head} {self.problem} eps={fmt(self.eps)} " + " ".join(parts)


def _argmax(values):
    """(max, index) of an object array, (0, None) when empty or all <= 0."""
    if len(values) == 0:
        return 0, None
    k = int(np.argmax(values))
    v = values[k]
    return (norm(v), k) if v > 0 else (0, None)


def _pos(arr):
    out = np.empty(len(arr), dtype=object)
    out[:] = [v if v > 0 else 0 for v in arr.tolist()]
    return out


def _abs(arr):
    out = np.empty(len(arr), dtype=object)
    out[:] = [abs(v) for v in arr.tolist()]
    return out


def _mask_out(values, ids):
    values = values.copy()
    values[np.asarray(list(ids), dtype=np.int64)] = 0
    return values


def flow_value(inst, flow, commodity=1):
    """(net outflow at the source, net inflow at the sink) of one commodity."""
    flow = as_flow(flow)
    g = inst.graph
    f = flow.commodity(commodity)
    if f is None:
        raise ValueError(f"flow has no commodity {commodity}")
    if hasattr(inst, "s"):
        s, t = inst.s, inst.t
    else:
        s, t = (inst.s1, inst.t1) if commodity == 1 else (inst.s2, inst.t2)
    out, inn = g.outflow(f), g.inflow(f)
    return norm(out[s] - inn[s]), norm(inn[t] - out[t])


# --------------------------------------------------------------- algebraic

def _check_lp(inst, x):
    A = inst.A
    r = A.matvec(x.values) - inst.b
    tau_c, at = _argmax(r)
    obj = inst.K - sum((inst.c * x.values).tolist())
    return {"constraint": tau_c, "objective": max(norm(obj), 0)}, {"constraint": at}


def _check_len(inst, x):
    r = _abs(inst.A.matvec(x.values) - inst.b)
    tau, at = _argmax(r)
    return {"constraint": tau}, {"constraint": at}


# -------------------------------------------------------------------- flows

def _congestion(g, total, fixed):
    over = _pos(total - g.cap)
    tu, au = _argmax(over)
    tau = {"congestion_upper": tu}
    where = {"congestion_upper": au}
    if fixed is not None:
        under = np.zeros(g.m, dtype=object)
        if len(fixed):
            under[fixed] = _pos(g.cap[fixed] - total[fixed])
        tl, al = _argmax(under)
        tau["congestion_lower"] = tl
        where["congestion_lower"] = al
    return tau, where


def _imbalance(g, f):
    return g.inflow(f) - g.outflow(f)


def _demand(g, f, exempt):
    gap = _mask_out(_abs(_imbalance(g, f)), exempt)
    return _argmax(gap)


def _homology(f, sets):
    sets = [h for h in sets if len(h)]
    if not sets:
        return 0, None
    sizes = np.fromiter((len(h) for h in sets), dtype=np.int64, count=len(sets))
    starts = np.concatenate([[0], np.cumsum(sizes)[:-1]])
    vals = f[np.concatenate(sets)]
    spread = np.maximum.reduceat(vals, starts) - np.minimum.reduceat(vals, starts)
    best, at = _argmax(spread)
    return best, at


def _check_single(inst, flow):
    g = inst.graph
    if not flow.single and any(v != 0 for v in flow.f2.tolist()):
        raise ValueError("single-commodity problem given a second commodity")
    f = flow.f1
    tau, where = _congestion(g, f, inst.fixed)
    tau["demand"], where["demand"] = _demand(g, f, (inst.s, inst.t))
    tau["homology"], where["homology"] = _homology(f, inst.homologous)
    return tau, where


def _two(flow, m):
    f1 = flow.f1
    f2 = flow.f2 if flow.f2 is not None else np.zeros(m, dtype=object)
    return f1, f2


def _check_two(inst, flow, fixed):
    g = inst.graph
    f1, f2 = _two(flow, g.m)
    tau, where = _congestion(g, f1 + f2, fixed)
    d1, a1 = _demand(g, f1, (inst.s1, inst.t1))
    d2, a2 = _demand(g, f2, (inst.s2, inst.t2))
    tau["demand"], where["demand"] = (d1, ("1", a1)) if d1 >= d2 else (d2, ("2", a2))
    where["demand"] = where["demand"] if tau["demand"] else None
    return tau, where, f1, f2


def _check_sff(inst, flow):
    tau, where, f1, f2 = _check_two(inst, flow, inst.fixed)
    t1, a1 = _argmax(f2[inst.S1]) if len(inst.S1) else (0, None)
    t2, a2 = _argmax(f1[inst.S2]) if len(inst.S2) else (0, None)
    if t1 >= t2:
        tau["type"], where["type"] = t1, (None if a1 is None else int(inst.S1[a1]))
    else:
        tau["type"], where["type"] = t2, int(inst.S2[a2])
    return tau, where


def _net_out(g, f, v):
    return sum(f[g.tail == v].tolist()) - sum(f[g.head == v].tolist())


def _terminal_values(g, f1, f2, inst):
    o1 = _net_out(g, f1, inst.s1)
    d1 = -_net_out(g, f1, inst.t1)
    o2 = _net_out(g, f2, inst.s2)
    d2 = -_net_out(g, f2, inst.t2)
    return norm(o1), norm(d1), norm(o2), norm(d2)


def requirement_gap(R, o1, d1, o2, d2):
    """Least achievable max_i max(|o_i - F_i|, |d_i - F_i|) over F1 + F2 >= R."""
    h1, h2 = Fraction(abs(o1 - d1), 2), Fraction(abs(o2 - d2), 2)
    M = Fraction(o1 + d1, 2) + Fraction(o2 + d2, 2)
    return norm(max(h1, h2, (R - M + h1 + h2) / 2))


def split_requirement(R, o1, d1, o2, d2):
    """Flow values (F1, F2) attaining requirement_gap."""
    h1, h2 = Fraction(abs(o1 - d1), 2), Fraction(abs(o2 - d2), 2)
    m1, m2 = Fraction(o1 + d1, 2), Fraction(o2 + d2, 2)
    short = R - m1 - m2
    if short <= 0:
        return norm(m1), norm(m2)
    tau = max(h1, h2, (short + h1 + h2) / 2)
    # raise each F_i up to its slack tau - h_i, lowest first
    r1 = min(tau - h1, short)
    return norm(m1 + r1), norm(m2 + short - r1)


def _check_cfr(inst, flow):
    tau, where, f1, f2 = _check_two(inst, flow, None)
    o1, d1, o2, d2 = _terminal_values(inst.graph, f1, f2, inst)
    gaps = [abs(o1 - inst.R1), abs(d1 - inst.R1), abs(o2 - inst.R2), abs(d2 - inst.R2)]
    k = max(range(4), key=lambda i: gaps[i])
    tau["requirement"] = norm(gaps[k])
    where["requirement"] = ("s1", "t1", "s2", "t2")[k] if gaps[k] else None
    return tau, where


def _check_cf(inst, flow):
    tau, where, f1, f2 = _check_two(inst, flow, None)
    o1, d1, o2, d2 = _terminal_values(inst.graph, f1, f2, inst)
    tau["requirement"] = requirement_gap(inst.R, o1, d1, o2, d2)
    where["requirement"] = "F1+F2>=R" if tau["requirement"] else None
    return tau, where


def _integral(inst, sol):
    """Multiply the solution and every right-hand side (b, K, capacities,
    requirements) by the common denominator D of the solution.  Each error
    notion is linear in those jointly, so the scaled errors are D times the
    true ones, and all sums below stay on Python ints."""
    if isinstance(sol, NonnegVector):
        D = common_denominator(sol.values)
    else:
        D = common_denominator(sol.f1)
        if sol.f2 is not None:
            D = lcm(D, common_denominator(sol.f2))
    if D == 1:
        return inst, sol, 1
    new = copy.copy(inst)
    if isinstance(sol, NonnegVector):
        sol = NonnegVector(scaled(sol.values, D))
        new.b = inst.b * D
        if isinstance(inst, LpInstance):
            new.K = inst.K * D
        return new, sol, D
    sol = TwoCommodityFlow(scaled(sol.f1, D), None if sol.f2 is None else scaled(sol.f2, D))
    g = inst.graph
    new.graph = FlowGraph(g.n, g.tail, g.head, g.cap * D, copy=False)
    for name in ("R", "R1", "R2"):
        if hasattr(inst, name):
            setattr(new, name, getattr(inst, name) * D)
    return new, sol, D


def check(problem, inst, solution, eps=0):
    """Evaluate every error notion of `problem` on (inst, solution).

    Returns (passed, ErrorReport).  A solution of the wrong length raises
    ValueError; negative entries are rejected when the solution is built.
    """
    problem = problem.lower()
    if problem not in _INSTANCE:
        raise ValueError(f"unknown problem class {problem!r}")
    if not isinstance(inst, _INSTANCE[problem]):
        if not (problem == "lena" and isinstance(inst, LenInstance)):
            raise TypeError(f"{problem} needs a {_INSTANCE[problem].__name__}, got {type(inst).__name__}")
    eps = rat(eps)
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    flags = []
    if eps > 1:
        flags.append("eps > 1 lies outside the range the definitions assume")
    if problem in ("lpa", "lena", "klena"):
        x = as_vector(solution)
        if len(x) != inst.A.n:
            raise ValueError(f"solution has {len(x)} entries, instance has {inst.A.n} variables")
        inst, x, D = _integral(inst, x)
        tau, where = (_check_lp if problem == "lpa" else _check_len)(inst, x)
    else:
        flow = as_flow(solution)
        if flow.m != inst.graph.m:
            raise ValueError(f"flow has {flow.m} entries, graph has {inst.graph.m} edges")
        inst, flow, D = _integral(inst, flow)
        if problem in ("fhfa", "fphfa"):
            tau, where = _check_single(inst, flow)
        elif problem == "sffa":
            tau, where = _check_sff(inst, flow)
        elif problem == "2cffa":
            tau, where = _check_two(inst, flow, inst.fixed)[:2]
        elif problem == "2cfra":
            tau, where = _check_cfr(inst, flow)
        else:
            tau, where = _check_cf(inst, flow)
    if D != 1:
        tau = {k: Fraction(v, D) for k, v in tau.items()}
    where = {k: v for k, v in where.items() if v is not None and tau.get(k)}
    rep = ErrorReport(problem, eps, tau, where, flags)
    return rep.passed, rep


def lp_encoded_adjust(inst, flow, eps):
    """Footnote adjustment for a flow that only reaches F1 + F2 >= R - eps:
    returns (F1, F2, 2 eps) with F1 + F2 = R, each F_i moved by <= eps."""
    flow = as_flow(flow)
    f1, f2 = _two(flow, inst.graph.m)
    o1, _, o2, _ = _terminal_values(inst.graph, f1, f2, inst)
    eps = rat(eps)
    short = inst.R - o1 - o2
    if short > eps:
        raise ValueError("flow value is more than eps below R")
    add = Fraction(max(short, 0), 2)
    return norm(o1 + add), norm(o2 + add), 2 * eps

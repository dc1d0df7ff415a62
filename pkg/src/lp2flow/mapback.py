"""Backward solution maps and the epsilon budget of the approximate chain.

map_back works on any nonnegative target solution, exact or not.  The
budget fixes, for each stage, how small the target error must be so that
the mapped-back solution stays within the source error.
"""
from fractions import Fraction

import numpy as np

from ._arith import fmt, norm, rat, zeros_obj
from .model import (NonnegVector, TwoCommodityFlow, _Value, as_flow,
                    as_vector, compute_X)
from .reduce import STAGES
from .verify import check, class_of

LEVELS = ("lp", "le", "2le", "1le", "h", "p", "s", "f", "r", "2cf")

# stage -> (source level, target level)
STAGE_LEVELS = {st: (LEVELS[k], LEVELS[k + 1]) for k, st in enumerate(STAGES)}


class ErrorBudget(_Value):
    """eps per problem level, from eps_lp down to eps_2cf."""
    _fields = ("values",)

    def __init__(self, values):
        missing = [k for k in LEVELS if k not in values]
        if missing:
            raise ValueError(f"budget lacks levels {missing}")
        self.values = {k: norm(rat(values[k])) for k in LEVELS}
        if any(v < 0 for v in self.values.values()):
            raise ValueError("budget entries must be nonnegative")

    def __getitem__(self, level):
        return self.values[level]

    def for_stage(self, stage):
        a, b = STAGE_LEVELS[stage]
        return self.values[a], self.values[b]

    def lines(self):
        return [f"eps_{k} = {fmt(self.values[k])}" for k in LEVELS]


def budget_stats(instances):
    """The size statistics the budget divides by, read off the ten
    instances returned by reduce_all."""
    le, le2, le1, h, p, s, f = (instances[k] for k in (1, 2, 3, 4, 5, 6, 7))
    return {
        "X_le": compute_X(le.A, le.b),
        "n_2le": le2.A.n,
        "n_1le": le1.A.n,
        "X_1le": compute_X(le1.A, le1.b),
        "E_h": h.graph.m,
        "E_p": p.graph.m,
        "E_s": s.graph.m,
        "E_f": f.graph.m,
    }


def error_budget(eps_lp, stats):
    """Divide eps_lp down the chain by the per-stage factors."""
    eps_lp = rat(eps_lp)
    if not 0 <= eps_lp <= 1:
        raise ValueError("eps_lp must lie in [0, 1]")
    if not isinstance(stats, dict):
        stats = budget_stats(stats)
    v = {"lp": eps_lp}
    v["le"] = eps_lp
    v["2le"] = Fraction(v["le"], 2 * max(stats["X_le"], 1))
    v["1le"] = v["2le"] / (stats["n_2le"] + 1)
    v["h"] = v["1le"] / (5 * stats["n_1le"] * max(stats["X_1le"], 1))
    v["p"] = v["h"] / max(stats["E_h"], 1)
    v["s"] = v["p"] / (11 * max(stats["E_p"], 1))
    v["f"] = v["s"] / (6 * max(stats["E_s"], 1))
    v["r"] = v["f"] / (12 * max(stats["E_f"], 1))
    v["2cf"] = v["r"] / 4
    return ErrorBudget(v)


# ------------------------------------------------------------- stage maps

def _len_lp(sol, tr):
    return NonnegVector(as_vector(sol).values[:tr["n"]])


def _2len_len(sol, tr):
    return NonnegVector(as_vector(sol).values[:tr["n_in"]])


def _1len_2len(sol, tr):
    x = as_vector(sol).values
    n = tr["n_in"]
    split = tr["split"]
    out = x[:n].copy()
    if len(split):
        twins = x[n:n + len(split)]
        out[split] = [norm(Fraction(a + b, 2)) for a, b in zip(out[split].tolist(), twins.tolist())]
    return NonnegVector(out)


def _fhf_1len(sol, tr):
    """x(j) = flow on j's edge in the lowest-index equation holding j;
    a variable present in no equation is set to 0."""
    f = as_flow(sol).f1
    ptr = tr["var_ptr"]
    n = tr["n_in"]
    out = zeros_obj(n)
    has = np.diff(ptr) > 0
    out[has] = f[tr["var_edges"][ptr[:-1][has]]]
    return NonnegVector(out)


def _fphf_fhf(sol, tr):
    return TwoCommodityFlow(as_flow(sol).f1[:tr["m_in"]])


def _sff_fphf(sol, tr):
    f1 = as_flow(sol).f1
    out = zeros_obj(tr["m_in"])
    copied = tr["copied"]
    out[copied] = f1[:len(copied)]
    P = tr["pairs"].reshape(-1, 2)
    gid = tr["gadget"].reshape(-1, 9)
    if len(P):
        out[P[:, 0]] = f1[gid[:, 0]]
        out[P[:, 1]] = f1[gid[:, 5]]
    return TwoCommodityFlow(out)


def _2cff_sff(sol, tr):
    fl = as_flow(sol)
    first = tr["first"]
    f2 = fl.f2 if fl.f2 is not None else zeros_obj(fl.m)
    return TwoCommodityFlow(fl.f1[first], f2[first])


def _2cfr_2cff(sol, tr):
    fl = as_flow(sol)
    m = tr["m_in"]
    f2 = fl.f2 if fl.f2 is not None else zeros_obj(fl.m)
    return TwoCommodityFlow(fl.f1[0:7 * m:7], f2[0:7 * m:7])


def _2cf_2cfr(sol, tr):
    fl = as_flow(sol)
    m = tr["m_in"]
    f2 = fl.f2 if fl.f2 is not None else zeros_obj(fl.m)
    return TwoCommodityFlow(fl.f1[:m], f2[:m])


_MAPS = {
    "lp-len": _len_lp, "len-2len": _2len_len, "2len-1len": _1len_2len,
    "1len-fhf": _fhf_1len, "fhf-fphf": _fphf_fhf, "fphf-sff": _sff_fphf,
    "sff-2cff": _2cff_sff, "2cff-2cfr": _2cfr_2cff, "2cfr-2cf": _2cf_2cfr,
}

# how many coordinates the target solution of each stage must have
_TARGET_LEN = {
    "lp-len": lambda tr: tr["n"] + tr["m"] + 1,
    "len-2len": lambda tr: tr["n_in"] + 4 * tr["carries"],
    "2len-1len": lambda tr: tr["n_in"] + len(tr["split"]),
    "1len-fhf": lambda tr: int(tr["e_minus"].max()) + 1 if len(tr["e_minus"]) else 0,
    "fhf-fphf": lambda tr: tr["m_in"] + len(tr["split"]),
    "fphf-sff": lambda tr: len(tr["copied"]) + len(tr["gadget"]),
    "sff-2cff": lambda tr: tr["m_out"],
    "2cff-2cfr": lambda tr: 7 * tr["m_in"] + 10,
    "2cfr-2cf": lambda tr: tr["m_in"] + 2,
}


def _size_of(sol):
    if isinstance(sol, (NonnegVector, TwoCommodityFlow)):
        return len(sol) if isinstance(sol, NonnegVector) else sol.m
    if isinstance(sol, tuple):
        return len(sol[0])
    return len(sol)


def map_back(stage, sol_b, trace, inst_b=None):
    """Stage-A solution from a (possibly approximate) stage-B solution."""
    if stage not in _MAPS:
        raise ValueError(f"unknown stage {stage!r}")
    if trace.stage != stage:
        raise ValueError(f"trace belongs to {trace.stage}, not {stage}")
    want = _TARGET_LEN[stage]
    if want is not None:
        have, need = _size_of(sol_b), want(trace.data)
        if have != need:
            raise ValueError(f"{stage}: solution has {have} coordinates, expected {need}")
    if inst_b is not None:
        need = inst_b.A.n if hasattr(inst_b, "A") else inst_b.graph.m
        if _size_of(sol_b) != need:
            raise ValueError(f"{stage}: solution does not match the target instance")
    return _MAPS[stage](sol_b, trace)


def map_back_chain(sol_2cf, traces, budget=None, instances=None):
    """Map a 2CF flow all the way back to an LP vector.

    Returns (x, reports).  With `instances` (as from reduce_all) and a
    budget, reports holds one (stage, target_report, source_report) per
    stage, checked at that stage's budgeted eps; otherwise reports is [].
    """
    if len(traces) != len(STAGES):
        raise ValueError("need one trace per stage")
    sol = sol_2cf
    sols = [sol]
    for k in range(len(STAGES) - 1, -1, -1):
        sol = map_back(STAGES[k], sol, traces[k])
        sols.append(sol)
    sols.reverse()
    reports = []
    if instances is not None and budget is not None:
        for k, st in enumerate(STAGES):
            ea, eb = budget.for_stage(st)
            _, rb = check(class_of(instances[k + 1]), instances[k + 1], sols[k + 1], eb)
            _, ra = check(class_of(instances[k]), instances[k], sols[k], ea)
            reports.append((st, rb, ra))
    return sols[0], reports


def claim_one_sum(cfr_flow, m_f):
    """Sum over 2CFF edges of |f1(e4) - f1(e6)| in the 7-edge gadgets."""
    f1 = as_flow(cfr_flow).f1
    a = f1[3:7 * m_f:7]
    b = f1[5:7 * m_f:7]
    return norm(sum(abs(x - y) for x, y in zip(a.tolist(), b.tolist())))


def precondition_flags(instances):
    """Size conditions the error arguments lean on.  The chain meets them
    on every valid LP; instances built by hand may not."""
    h, p, s = instances[4], instances[5], instances[6]
    flags = []
    if h.graph.m - len(h.fixed) < 1:
        flags.append("fhf: every edge is fixed")
    if len(p.pairs) < 1:
        flags.append("fphf: no homologous pair")
    if len(s.S1) < 1 or len(s.S2) < 1:
        flags.append("sff: a selective set is empty")
    return flags

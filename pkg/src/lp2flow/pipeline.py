"""End-to-end compile / recover plus size and budget audits."""
import time
from fractions import Fraction

from ._arith import fmt, floor_log2
from .mapback import LEVELS, budget_stats, error_budget, map_back_chain, precondition_flags
from .model import _Value, compute_X, size_stats, validate
from .reduce import REDUCERS, STAGES, TARGET_CLASS


class Audit(_Value):
    _fields = ("name", "ok", "lhs", "op", "rhs")

    def __init__(self, name, lhs, op, rhs):
        self.name, self.lhs, self.op, self.rhs = name, lhs, op, rhs
        self.ok = (lhs == rhs) if op == "=" else (lhs <= rhs) if op == "<=" else (lhs >= rhs)

    def line(self):
        mark = "ok  " if self.ok else "FAIL"
        return f"{mark} {self.name}: {fmt(self.lhs)} {self.op} {fmt(self.rhs)}"


class CompileReport(_Value):
    _fields = ("sizes", "budget", "audits", "flags")

    def __init__(self, sizes, budget, audits, flags=(), timings=None):
        self.sizes = list(sizes)
        self.budget = budget
        self.audits = list(audits)
        self.flags = list(flags)
        self.timings = dict(timings or {})

    @property
    def ok(self):
        return all(a.ok for a in self.audits)

    def failed(self):
        return [a for a in self.audits if not a.ok]

    def lines(self):
        out = []
        for name, st in self.sizes:
            out.append(name + ": " + ", ".join(f"{k}={fmt(v)}" for k, v in st.items()))
        if self.budget is not None:
            out += self.budget.lines()
        out += [a.line() for a in self.audits]
        out += [f"flag: {f}" for f in self.flags]
        return out


class Compiled(tuple):
    """(cf, traces, budget, report); `.instances` holds all ten instances."""

    def __new__(cls, cf, traces, budget, report, instances):
        self = super().__new__(cls, (cf, traces, budget, report))
        self.instances = instances
        return self

    cf = property(lambda self: self[0])
    traces = property(lambda self: self[1])
    budget = property(lambda self: self[2])
    report = property(lambda self: self[3])


def _lg(x):
    return floor_log2(max(int(x), 1))


def size_laws(instances, traces):
    """Every size relation of the nine stages, evaluated on one chain.

    Where the construction drops vacuous pieces (zero right-hand sides,
    homologous singletons, the e2 edge of fixed selective edges) the exact
    count is checked with "=" and the stated closed form with "<=".
    """
    lp, le, l2, l1, h, p, s, f, r, cf = instances
    t = {tr.stage: tr for tr in traces}
    A = []
    add = lambda name, lhs, op, rhs: A.append(Audit(name, lhs, op, rhs))

    n, m, nnz = lp.n, lp.m, lp.A.nnz
    X = max(compute_X(lp.A, lp.b, lp.c, lp.K), 1)
    add("lp-len n~ = n+m+1", le.n, "=", n + m + 1)
    add("lp-len m~ = m+1", le.m, "=", m + 1)
    add("lp-len nnz~ <= 4 nnz", le.A.nnz, "<=", 4 * nnz)
    add("lp-len R~ = 5mRX", le.R, "=", 5 * m * lp.R * X)
    add("lp-len X(A~,b~) = X(A,b,c,K)", compute_X(le.A, le.b), "=", X)

    Xt = max(compute_X(le.A, le.b), 1)
    L = _lg(Xt)
    C = t["len-2len"]["carries"]
    add("len-2len n_ <= n~+4m~(1+log X)", l2.n, "<=", le.n + 4 * le.m * (1 + L))
    add("len-2len n_ = n~+4(carries)", l2.n, "=", le.n + 4 * C)
    add("len-2len m_ <= 3m~(1+log X)", l2.m, "<=", 3 * le.m * (1 + L))
    add("len-2len nnz_ <= 17 nnz~(1+log X)", l2.A.nnz, "<=", 17 * le.A.nnz * (1 + L))
    add("len-2len R_ = 8m~R~X(1+ceil log X)", l2.R, "=",
        8 * le.m * le.R * Xt * (1 + (Xt - 1).bit_length()))
    add("len-2len X(A_,b_) " + ("=" if C else "<=") + " 2XR~",
        compute_X(l2.A, l2.b), "=" if C else "<=", 2 * Xt * le.R)
    add("len-2len k = 2", l2.A.absmax(), "<=", 2)

    add("2len-1len n^ <= 2n_", l1.n, "<=", 2 * l2.n)
    add("2len-1len m^ <= m_+n_", l1.m, "<=", l2.m + l2.n)
    add("2len-1len nnz^ <= 4 nnz_", l1.A.nnz, "<=", 4 * l2.A.nnz)
    add("2len-1len R^ = 2R_", l1.R, "=", 2 * l2.R)
    add("2len-1len X unchanged", compute_X(l1.A, l1.b), "=", compute_X(l2.A, l2.b))
    add("2len-1len k = 1", l1.A.absmax(), "<=", 1)

    tr = t["1len-fhf"]
    kept = len(tr["rows"])
    nb = int((tr["b_edge"] >= 0).sum())
    multi = sum(1 for j in range(l1.n) if tr["var_ptr"][j + 1] - tr["var_ptr"][j] >= 2)
    add("1len-fhf |V| = 2m^+2", h.graph.n, "=", 2 * kept + 2)
    add("1len-fhf kept rows = m^", kept, "=", l1.m)
    add("1len-fhf |E| = nnz^+2m^+#(b^!=0)", h.graph.m, "=", l1.A.nnz + 2 * kept + nb)
    add("1len-fhf |E| <= 4 nnz^", h.graph.m, "<=", 4 * l1.A.nnz)
    add("1len-fhf |F| = #(b^!=0)", len(h.fixed), "=", nb)
    add("1len-fhf |F| <= m^", len(h.fixed), "<=", l1.m)
    add("1len-fhf h = #(multi vars)+m^", len(h.homologous), "=", multi + kept)
    add("1len-fhf h <= n^+m^", len(h.homologous), "<=", l1.n + l1.m)
    add("1len-fhf max cap <= max(R^, X)", h.graph.max_capacity(), "<=",
        max(l1.R, compute_X(l1.A, l1.b)))

    interior = len(t["fhf-fphf"]["split"])
    add("fhf-fphf |V^p| = |V^h|+interior", p.graph.n, "=", h.graph.n + interior)
    add("fhf-fphf |V^p| <= |V^h|+|E^h|", p.graph.n, "<=", h.graph.n + h.graph.m)
    add("fhf-fphf |E^p| <= 2|E^h|", p.graph.m, "<=", 2 * h.graph.m)
    add("fhf-fphf |F^p| = |F^h|", len(p.fixed), "=", len(h.fixed))
    add("fhf-fphf p = sum(|H|-1)", len(p.pairs), "=", sum(len(x) - 1 for x in h.homologous))
    add("fhf-fphf p <= |E^h|", len(p.pairs), "<=", h.graph.m)
    add("fhf-fphf max cap unchanged", p.graph.max_capacity(), "=", h.graph.max_capacity())

    q = len(p.pairs)
    add("fphf-sff |V^s| = |V^p|+4p+2", s.graph.n, "=", p.graph.n + 4 * q + 2)
    add("fphf-sff |E^s| = |E^p|+7p", s.graph.m, "=", p.graph.m + 7 * q)
    add("fphf-sff |F^s| = |F^p|+2p", len(s.fixed), "=", len(p.fixed) + 2 * q)
    add("fphf-sff |S1| = |E^p|+2p", len(s.S1), "=", p.graph.m + 2 * q)
    add("fphf-sff |S2| = 3p", len(s.S2), "=", 3 * q)
    add("fphf-sff max cap unchanged", s.graph.max_capacity(), "=", p.graph.max_capacity())

    S = len(s.S1) + len(s.S2)
    sel = set(s.S1.tolist()) | set(s.S2.tolist())
    fx = set(s.fixed.tolist())
    fsel = len(fx & sel)
    add("sff-2cff |V^f| = |V^s|+2(|S1|+|S2|)", f.graph.n, "=", s.graph.n + 2 * S)
    add("sff-2cff |E^f| = |E^s|+4|S|-|F^s&S|", f.graph.m, "=", s.graph.m + 4 * S - fsel)
    add("sff-2cff |E^f| <= |E^s|+4(|S1|+|S2|)", f.graph.m, "<=", s.graph.m + 4 * S)
    add("sff-2cff |F^f| = |F^s-S|+4|F^s&S|+2|S-F^s|", len(f.fixed), "=",
        len(fx - sel) + 4 * fsel + 2 * (S - fsel))
    add("sff-2cff |F^f| <= 4(|F^s|+|S1|+|S2|)", len(f.fixed), "<=", 4 * (len(fx) + S))
    add("sff-2cff max cap <= max cap", f.graph.max_capacity(), "<=", s.graph.max_capacity())

    Mf = t["2cff-2cfr"]["Mf"]
    add("2cff-2cfr M^f = sum u", Mf, "=", f.graph.total_capacity())
    add("2cff-2cfr |V^r| = |V^f|+2|E^f|+8", r.graph.n, "=", f.graph.n + 2 * f.graph.m + 8)
    add("2cff-2cfr |E^r| = 7|E^f|+10", r.graph.m, "=", 7 * f.graph.m + 10)
    add("2cff-2cfr R1 = 2M^f", r.R1, "=", 2 * Mf)
    add("2cff-2cfr R2 = 2M^f", r.R2, "=", 2 * Mf)
    add("2cff-2cfr max cap <= max(2|u|, M^f)", r.graph.max_capacity(), "<=",
        max(2 * f.graph.max_capacity(), Mf))

    add("2cfr-2cf |V| = |V^r|+2", cf.graph.n, "=", r.graph.n + 2)
    add("2cfr-2cf |E| = |E^r|+2", cf.graph.m, "=", r.graph.m + 2)
    add("2cfr-2cf R = R1+R2", cf.R, "=", r.R1 + r.R2)
    add("2cfr-2cf max cap = max(|u^r|, R1, R2)", cf.graph.max_capacity(), "=",
        max(r.graph.max_capacity(), r.R1, r.R2))
    return A


def theorem_bounds(lp, cf):
    nnz = lp.A.nnz
    X = max(compute_X(lp.A, lp.b, lp.c, lp.K), 1)
    L = _lg(X)
    size = 10 ** 6 * nnz * (3 + L)
    mag = 10 ** 8 * nnz ** 3 * lp.R * X ** 2 * (2 + L) ** 2
    return [
        Audit("theorem |V| <= 1e6 nnz (3+log X)", cf.graph.n, "<=", size),
        Audit("theorem |E| <= 1e6 nnz (3+log X)", cf.graph.m, "<=", size),
        Audit("theorem |u|max <= 1e8 nnz^3 R X^2 (2+log X)^2", cf.graph.max_capacity(), "<=", mag),
        Audit("theorem R <= 1e8 nnz^3 R X^2 (2+log X)^2", cf.R, "<=", mag),
    ]


def budget_floor(lp, budget):
    nnz = lp.A.nnz
    X = max(compute_X(lp.A, lp.b, lp.c, lp.K), 1)
    L = _lg(X)
    floor_ = Fraction(budget["lp"], 10 ** 24 * nnz ** 7 * lp.R * X ** 3 * (3 + L) ** 6)
    return Audit("budget eps_2cf >= eps_lp / (1e24 nnz^7 R X^3 (3+log X)^6)",
                 budget["2cf"], ">=", floor_)


def compile(lp, eps_lp=0, audit=True):
    """Run all nine reductions.  Returns Compiled(cf, traces, budget, report)."""
    errs = validate(lp)
    if errs:
        raise ValueError("invalid LP: " + "; ".join(errs))
    instances, traces, timings = [lp], [], {}
    cur = lp
    for st in STAGES:
        t0 = time.perf_counter()
        cur, tr = REDUCERS[st](cur)
        timings[st] = time.perf_counter() - t0
        instances.append(cur)
        traces.append(tr)
    budget = error_budget(eps_lp, budget_stats(instances))
    sizes = [("lp", size_stats(lp))] + [(TARGET_CLASS[st], size_stats(i))
                                        for st, i in zip(STAGES, instances[1:])]
    audits = []
    flags = []
    if audit:
        audits = size_laws(instances, traces) + theorem_bounds(lp, cur) + [budget_floor(lp, budget)]
        for k, inst in enumerate(instances[1:]):
            bad = validate(inst)
            audits.append(Audit(f"validate {STAGES[k]} output", len(bad), "=", 0))
        flags = precondition_flags(instances)
    report = CompileReport(sizes, budget, audits, flags, timings)
    return Compiled(cur, traces, budget, report, instances)


def recover(sol_2cf, traces, budget=None, instances=None):
    """Map a 2CF flow back to an LP vector, with per-stage reports when the
    instances are supplied."""
    return map_back_chain(sol_2cf, traces, budget, instances)


__all__ = ["compile", "recover", "CompileReport", "Compiled", "Audit", "size_laws",
           "theorem_bounds", "budget_floor", "LEVELS"]

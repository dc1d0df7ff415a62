"""Exact reference solvers, meant for tiny instances in tests.

lp_feasible_exact     Fourier-Motzkin elimination on Ax <= b, c^T x >= K, x >= 0.
lp_feasible_vertices  independent cross-check by enumerating basic solutions.
twocf_solve_exact     2CF written as an LP, shrunk by a generic presolve and
                      finished by a fraction-free (integer) phase-1 simplex.

None of these read reduction traces; they only see the instance.
"""
import itertools
import os
from collections import deque
from fractions import Fraction
from math import gcd, lcm

import numpy as np

from ._arith import norm, rat
from .model import LpInstance, TwoCommodityFlow, TwoCfInstance

LP_GUARD = 8
TWOCF_GUARD = 200


class SizeGuardError(ValueError):
    pass


def _guard(default):
    env = os.environ.get("LP2FLOW_SIZE_GUARD")
    if env:
        try:
            return int(env)
        except ValueError:
            raise ValueError(f"LP2FLOW_SIZE_GUARD must be an integer, got {env!r}")
    return default


# ------------------------------------------------------------ Fourier-Motzkin

def _normalise(coefs, rhs):
    """Scale an inequality sum(coefs) x <= rhs to coprime integers."""
    d = 1
    for v in list(coefs) + [rhs]:
        if isinstance(v, Fraction):
            d = lcm(d, v.denominator)
    co = [int(v * d) for v in coefs]
    r = int(rhs * d)
    g = 0
    for v in co:
        g = gcd(g, v)
    if g > 1:
        co = [v // g for v in co]
        # floor is fine only for integer points; keep the exact rational bound
        r = Fraction(r, g)
    return tuple(co), norm(r)


def _lp_rows(lp):
    n = lp.n
    rows = []
    dense = lp.A.dense()
    for i in range(lp.m):
        rows.append((dense[i], lp.b[i]))
    rows.append(([-v for v in lp.c.tolist()], -lp.K))
    for j in range(n):
        e = [0] * n
        e[j] = -1
        rows.append((e, 0))
    return rows


def lp_feasible_exact(lp, max_size=None):
    """(feasible, x or None) by eliminating variables one at a time."""
    guard = max_size if max_size is not None else _guard(LP_GUARD)
    if lp.n > guard or lp.m > guard:
        raise SizeGuardError(f"LP with n={lp.n}, m={lp.m} exceeds the oracle guard {guard}")
    n = lp.n
    system = {_normalise(c, r) for c, r in _lp_rows(lp)}
    levels = []
    for k in range(n - 1, -1, -1):
        levels.append(list(system))
        pos, neg, rest = [], [], []
        for co, r in system:
            (pos if co[k] > 0 else neg if co[k] < 0 else rest).append((co, r))
        new = set(rest)
        for cp, rp in pos:
            for cn, rn in neg:
                a, b = cp[k], -cn[k]
                co = [b * x + a * y for x, y in zip(cp, cn)]
                new.add(_normalise(co, b * rp + a * rn))
        system = new
    for co, r in system:
        if r < 0:
            return False, None
    x = [0] * n
    for k, sysk in zip(range(n), reversed(levels)):
        lo, hi = Fraction(0), None
        for co, r in sysk:
            a = co[k]
            if a == 0:
                continue
            rest = r - sum(co[j] * x[j] for j in range(k))
            bound = Fraction(rest) / a
            if a > 0:
                hi = bound if hi is None else min(hi, bound)
            else:
                lo = max(lo, bound)
        if hi is not None and lo > hi:
            raise AssertionError("elimination back-substitution failed")
        x[k] = norm(lo)
    return True, x


def _solve_square(M, v):
    """Exact Gaussian elimination; None when singular."""
    k = len(M)
    T = [[Fraction(a) for a in row] + [Fraction(b)] for row, b in zip(M, v)]
    for col in range(k):
        piv = next((r for r in range(col, k) if T[r][col] != 0), None)
        if piv is None:
            return None
        T[col], T[piv] = T[piv], T[col]
        p = T[col][col]
        T[col] = [a / p for a in T[col]]
        for r in range(k):
            if r != col and T[r][col] != 0:
                f = T[r][col]
                T[r] = [a - f * b for a, b in zip(T[r], T[col])]
    return [norm(T[r][k]) for r in range(k)]


def lp_feasible_vertices(lp, max_size=None):
    """(feasible, x or None) by trying every basic solution.  The region
    lies in x >= 0, so it is nonempty iff it has a vertex."""
    guard = max_size if max_size is not None else _guard(LP_GUARD)
    if lp.n > guard or lp.m > guard:
        raise SizeGuardError(f"LP with n={lp.n}, m={lp.m} exceeds the oracle guard {guard}")
    rows = _lp_rows(lp)
    n = lp.n
    for pick in itertools.combinations(range(len(rows)), n):
        x = _solve_square([rows[i][0] for i in pick], [rows[i][1] for i in pick])
        if x is None:
            continue
        if all(sum(a * xj for a, xj in zip(co, x)) <= r for co, r in rows):
            return True, x
    return False, None


def optimize_by_bisection(A, b, c, R, K_lo, K_hi, solver=None):
    """Largest integer K in [K_lo, K_hi] whose decision LP is feasible, or
    None when even K_lo is infeasible."""
    K_lo, K_hi = int(K_lo), int(K_hi)
    if K_lo > K_hi:
        raise ValueError("empty K range")
    solver = solver or (lambda lp: lp_feasible_exact(lp)[0])

    def ok(K):
        return solver(LpInstance(A, b, c, K, R))

    if not ok(K_lo):
        return None
    lo, hi = K_lo, K_hi
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if ok(mid):
            lo = mid
        else:
            hi = mid - 1
    return lo


# ------------------------------------------------------- exact LP machinery

class Infeasible(Exception):
    pass


class LinearModel:
    """Feasibility model: lo <= x <= hi and rows sum a_j x_j (= or <=) rhs."""

    def __init__(self, nvars):
        self.lo = [0] * nvars
        self.hi = [None] * nvars
        self.rows = []
        self.sense = []
        self.rhs = []

    def add_row(self, coefs, sense, rhs):
        row = {}
        for j, a in coefs:
            if a:
                row[j] = row.get(j, 0) + a
        self.rows.append({j: a for j, a in row.items() if a})
        self.sense.append(sense)
        self.rhs.append(rhs)


class _Presolver:
    """Forcing rows, singleton rows and doubleton equations, repeated until
    nothing changes.  Every step is an exact equivalence, recorded so the
    removed variables can be restored afterwards."""

    def __init__(self, model):
        self.lo = list(model.lo)
        self.hi = list(model.hi)
        self.rows = [dict(r) for r in model.rows]
        self.sense = list(model.sense)
        self.rhs = list(model.rhs)
        self.alive = [True] * len(self.rows)
        self.cols = [set() for _ in self.lo]
        for i, r in enumerate(self.rows):
            for j in r:
                self.cols[j].add(i)
        self.state = [None] * len(self.lo)  # None = active
        self.stack = []
        self.queue = deque(range(len(self.rows)))
        self.queued = [True] * len(self.rows)

    def _push(self, i):
        if self.alive[i] and not self.queued[i]:
            self.queued[i] = True
            self.queue.append(i)

    def _drop(self, i):
        self.alive[i] = False
        for j in self.rows[i]:
            self.cols[j].discard(i)
        self.rows[i] = {}

    def fix(self, j, v):
        v = norm(v)
        if v < self.lo[j] or (self.hi[j] is not None and v > self.hi[j]):
            raise Infeasible(f"variable {j} forced outside its bounds")
        self.state[j] = ("fix", v)
        self.stack.append(j)
        for i in list(self.cols[j]):
            a = self.rows[i].pop(j)
            self.rhs[i] = norm(self.rhs[i] - a * v)
            self._push(i)
        self.cols[j] = set()

    def _bound(self, j, lo=None, hi=None):
        changed = False
        if lo is not None and lo > self.lo[j]:
            self.lo[j] = norm(lo)
            changed = True
        if hi is not None and (self.hi[j] is None or hi < self.hi[j]):
            self.hi[j] = norm(hi)
            changed = True
        if self.hi[j] is not None and self.lo[j] > self.hi[j]:
            raise Infeasible(f"variable {j} has empty bounds")
        if self.hi[j] is not None and self.lo[j] == self.hi[j]:
            self.fix(j, self.lo[j])
        elif changed:
            for i in self.cols[j]:
                self._push(i)

    def substitute(self, i, x, y):
        """Row i reads a x + b y = c; replace x by c/a - (b/a) y everywhere."""
        row = self.rows[i]
        a, b, c = row[x], row[y], self.rhs[i]
        alpha = norm(Fraction(c) / a)
        beta = norm(Fraction(-b) / a)
        self._drop(i)
        self.state[x] = ("sub", alpha, beta, y)
        self.stack.append(x)
        for k in list(self.cols[x]):
            r = self.rows[k]
            ax = r.pop(x)
            nv = norm(r.get(y, 0) + ax * beta)
            if nv:
                r[y] = nv
                self.cols[y].add(k)
            else:
                r.pop(y, None)
                self.cols[y].discard(k)
            self.rhs[k] = norm(self.rhs[k] - ax * alpha)
            self._push(k)
        self.cols[x] = set()
        # lo_x <= alpha + beta y <= hi_x
        lo, hi = self.lo[x], self.hi[x]
        blo = Fraction(lo - alpha) / beta
        bhi = None if hi is None else Fraction(hi - alpha) / beta
        if beta > 0:
            self._bound(y, lo=blo, hi=bhi)
        else:
            self._bound(y, lo=bhi, hi=blo)

    def _activity(self, row):
        """(min, max) of the row's left side; None stands for -inf / +inf."""
        mn, mx = 0, 0
        for j, a in row.items():
            lo, hi = self.lo[j], self.hi[j]
            if a > 0:
                mn = None if mn is None else mn + a * lo
                mx = None if (mx is None or hi is None) else mx + a * hi
            else:
                mx = None if mx is None else mx + a * lo
                mn = None if (mn is None or hi is None) else mn + a * hi
        return mn, mx

    def _implied_upper(self, i):
        """Give a finite upper bound to the one unbounded variable of a row,
        when the rest of the row is bounded."""
        row, rhs, sense = self.rows[i], self.rhs[i], self.sense[i]
        free = [j for j in row if self.hi[j] is None]
        if len(free) != 1:
            return
        j = free[0]
        a = row[j]
        rest = {k: v for k, v in row.items() if k != j}
        mn, mx = self._activity(rest)
        if a > 0:
            self._bound(j, hi=Fraction(rhs - mn) / a)
        elif sense == "E":
            self._bound(j, hi=Fraction(rhs - mx) / a)

    def _force(self, i, at_min):
        for j, a in list(self.rows[i].items()):
            lo, hi = self.lo[j], self.hi[j]
            v = lo if (a > 0) == at_min else hi
            if v is None:
                raise AssertionError("forcing row on an unbounded variable")
            self.fix(j, v)
        self._drop(i)

    def run(self):
        while self.queue:
            i = self.queue.popleft()
            self.queued[i] = False
            if not self.alive[i]:
                continue
            row, rhs, sense = self.rows[i], self.rhs[i], self.sense[i]
            if not row:
                if (sense == "E" and rhs != 0) or (sense == "L" and rhs < 0):
                    raise Infeasible(f"row {i} reads 0 {sense} {rhs}")
                self._drop(i)
                continue
            mn, mx = self._activity(row)
            if sense == "L":
                if mx is not None and mx <= rhs:
                    self._drop(i)
                    continue
                if mn is not None and mn > rhs:
                    raise Infeasible(f"row {i} cannot be met")
                if mn is not None and mn == rhs:
                    self._force(i, True)
                    continue
                if len(row) == 1:
                    (j, a), = row.items()
                    self._drop(i)
                    if a > 0:
                        self._bound(j, hi=Fraction(rhs) / a)
                    else:
                        self._bound(j, lo=Fraction(rhs) / a)
                continue
            # equality
            if (mn is not None and mn > rhs) or (mx is not None and mx < rhs):
                raise Infeasible(f"row {i} cannot be met")
            if mn is not None and mn == rhs:
                self._force(i, True)
                continue
            if mx is not None and mx == rhs:
                self._force(i, False)
                continue
            if len(row) == 1:
                (j, a), = row.items()
                self._drop(i)
                self.fix(j, Fraction(rhs) / a)
                continue
            if len(row) == 2:
                (j1, _), (j2, _) = row.items()
                # eliminate the variable touching fewer rows
                x, y = (j1, j2) if len(self.cols[j1]) <= len(self.cols[j2]) else (j2, j1)
                self.substitute(i, x, y)
                continue
            self._implied_upper(i)
        return self

    def residual(self):
        live = [i for i, a in enumerate(self.alive) if a and self.rows[i]]
        used = sorted({j for i in live for j in self.rows[i]})
        return live, used

    def restore(self, values):
        """Full solution from values of the residual variables.  Removed
        variables only depend on variables removed later (or never), so
        one backward pass over the removal stack suffices."""
        x = [None] * len(self.lo)
        for j, v in values.items():
            x[j] = v
        for j in range(len(x)):
            if x[j] is None and self.state[j] is None:
                x[j] = self.lo[j]
        for j in reversed(self.stack):
            st = self.state[j]
            if st[0] == "fix":
                x[j] = st[1]
            else:
                _, alpha, beta, y = st
                x[j] = norm(alpha + beta * x[y])
        return x


def _int_row(coefs, rhs):
    d = 1
    for v in list(coefs) + [rhs]:
        if isinstance(v, Fraction):
            d = lcm(d, v.denominator)
    return [int(v * d) for v in coefs], int(rhs * d)


def _row_gcd(row, den):
    g = den
    for v in row.tolist():
        if v:
            g = gcd(g, v)
            if g == 1:
                return 1
    return g


def simplex_feasible(lo, hi, rows, senses, rhs, max_pivots=200000):
    """Phase-1 simplex on lo <= x <= hi plus rows, in exact integers.

    Every tableau row is kept as integers over its own positive
    denominator, so a pivot only touches rows with a nonzero entry in the
    entering column.  Artificial columns are never stored: an artificial
    leaves the basis for good.  Dantzig's rule, with Bland's rule once
    degenerate pivots pile up.  Returns a feasible x or None.
    """
    n = len(lo)
    cons = []
    for r, s, b in zip(rows, senses, rhs):
        cons.append((r, s, b - sum(a * lo[j] for j, a in r.items())))
    for j in range(n):
        if hi[j] is not None:
            cons.append(({j: 1}, "L", hi[j] - lo[j]))
    m = len(cons)
    n_slack = sum(1 for c in cons if c[1] == "L")
    width = n + n_slack + 1
    T = np.zeros((m + 1, width), dtype=object)
    den = [1] * (m + 1)
    basis = [0] * m
    art = []
    sk = n
    for i, (r, s, b) in enumerate(cons):
        co, bi = _int_row([r.get(j, 0) for j in range(n)], b)
        row = np.zeros(width, dtype=object)
        row[:n] = co
        slack = None
        if s == "L":
            row[sk] = 1
            slack = sk
            sk += 1
        row[-1] = bi
        if bi < 0:
            row = -row
        if slack is not None and row[slack] > 0:
            basis[i] = slack
        else:
            basis[i] = width + i  # artificial, not stored
            art.append(i)
        T[i] = row
    for i in art:
        T[m] -= T[i]
    degenerate = 0
    bland = False
    for _ in range(max_pivots):
        obj = T[m, :-1]
        cand = np.flatnonzero(obj < 0)
        if len(cand) == 0:
            break
        c = int(cand[0]) if bland else int(cand[np.argmin(obj[cand])])
        col = T[:m, c]
        hit = np.flatnonzero(col != 0)
        best = None
        for i in hit.tolist():
            if col[i] > 0:
                key = (Fraction(T[i, -1], col[i]), basis[i])
                if best is None or key < best[0]:
                    best = (key, i)
        if best is None:
            raise AssertionError("unbounded phase-1 direction")
        r = best[1]
        if T[r, -1] == 0:
            degenerate += 1
            bland = bland or degenerate > 50
        else:
            degenerate = 0
        p = T[r, c]
        prow = T[r]
        for i in hit.tolist() + [m]:
            if i == r:
                continue
            q = T[i, c]
            if q == 0:
                continue
            new = T[i] * p - prow * q
            dn = den[i] * p
            g = _row_gcd(new, dn)
            if g > 1:
                new //= g
                dn //= g
            T[i] = new
            den[i] = dn
        g = _row_gcd(prow, p)
        T[r] = prow // g
        den[r] = p // g
        basis[r] = c
    else:
        raise RuntimeError("simplex pivot limit reached")
    if T[m, -1] != 0:
        return None
    y = [0] * n
    for i, j in enumerate(basis):
        if j < n:
            y[j] = Fraction(T[i, -1], den[i])
    return [norm(lo[j] + y[j]) for j in range(n)]


def solve_model(model, presolve=True):
    """(feasible, x or None) for a LinearModel, exactly."""
    if presolve:
        pre = _Presolver(model)
        try:
            pre.run()
        except Infeasible:
            return False, None
        live, used = pre.residual()
        idx = {j: k for k, j in enumerate(used)}
        rows = [{idx[j]: a for j, a in pre.rows[i].items()} for i in live]
        sol = simplex_feasible([pre.lo[j] for j in used], [pre.hi[j] for j in used],
                               rows, [pre.sense[i] for i in live], [pre.rhs[i] for i in live])
        if sol is None:
            return False, None
        x = pre.restore({j: sol[idx[j]] for j in used})
        return True, x
    rows = model.rows
    sol = simplex_feasible(model.lo, model.hi, rows, model.sense, model.rhs)
    return (sol is not None), sol


def presolve_stats(model):
    pre = _Presolver(model)
    try:
        pre.run()
    except Infeasible:
        return {"infeasible": True}
    live, used = pre.residual()
    return {"rows": len(live), "vars": len(used)}


# ---------------------------------------------------------------- 2CF as LP

def _reach(n, src, dst, start):
    adj = [[] for _ in range(n)]
    for a, b in zip(src, dst):
        adj[a].append(b)
    seen = np.zeros(n, dtype=bool)
    seen[start] = True
    stack = [start]
    while stack:
        v = stack.pop()
        for w in adj[v]:
            if not seen[w]:
                seen[w] = True
                stack.append(w)
    return seen


def twocf_model(cf):
    """LP encoding of a 2CF instance.

    Variables: f_i(e) for each commodity and each edge lying on some
    s_i -> t_i walk (flow elsewhere can only circulate and is dropped),
    then F1, F2.  Rows: capacity, conservation off the terminals, source
    and sink balance equal to F_i, and F1 + F2 >= R.
    Returns (model, var_of) with var_of[(i, e)] -> variable index.
    """
    g = cf.graph
    tail, head = g.tail.tolist(), g.head.tolist()
    cap = g.cap.tolist()
    var_of = {}
    live = []
    for i, (s, t) in enumerate(((cf.s1, cf.t1), (cf.s2, cf.t2)), start=1):
        fwd = _reach(g.n, tail, head, s)
        bwd = _reach(g.n, head, tail, t)
        ok = fwd[g.tail] & bwd[g.head]
        for e in np.flatnonzero(ok).tolist():
            var_of[(i, e)] = len(live)
            live.append((i, e))
    F = [len(live), len(live) + 1]
    model = LinearModel(len(live) + 2)
    for k, (i, e) in enumerate(live):
        model.hi[k] = cap[e]
    model.hi[F[0]] = None
    model.hi[F[1]] = None
    for e in range(g.m):
        vs = [var_of[(i, e)] for i in (1, 2) if (i, e) in var_of]
        if len(vs) == 2:
            model.add_row([(v, 1) for v in vs], "L", cap[e])
    for i, (s, t) in enumerate(((cf.s1, cf.t1), (cf.s2, cf.t2)), start=1):
        bal = [[] for _ in range(g.n)]
        for (ci, e), v in var_of.items():
            if ci != i:
                continue
            bal[tail[e]].append((v, 1))
            bal[head[e]].append((v, -1))
        for v in range(g.n):
            if v == s:
                model.add_row(bal[v] + [(F[i - 1], -1)], "E", 0)
            elif v == t:
                model.add_row(bal[v] + [(F[i - 1], 1)], "E", 0)
            elif bal[v]:
                model.add_row(bal[v], "E", 0)
    model.add_row([(F[0], -1), (F[1], -1)], "L", -cf.R)
    return model, var_of


def twocf_solve_exact(cf, max_edges=None, presolve=True):
    """(feasible, TwoCommodityFlow or None): is there a 2-commodity flow
    with F1 + F2 >= R?"""
    guard = max_edges if max_edges is not None else _guard(TWOCF_GUARD)
    if cf.graph.m > guard:
        raise SizeGuardError(f"2CF with {cf.graph.m} edges exceeds the oracle guard {guard}")
    model, var_of = twocf_model(cf)
    ok, x = solve_model(model, presolve=presolve)
    if not ok:
        return False, None
    m = cf.graph.m
    f1 = [0] * m
    f2 = [0] * m
    for (i, e), v in var_of.items():
        (f1 if i == 1 else f2)[e] = x[v]
    return True, TwoCommodityFlow(f1, f2)

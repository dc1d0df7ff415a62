"""Instance and solution types for every problem class in the chain.

All numbers are exact: Python ints for data, ints or Fractions for solution
values.  Arrays are numpy (int64 for ids, object for numbers) and are
marked read-only once an instance is built.
"""
from fractions import Fraction
from math import ceil, floor, lcm

import numpy as np

from ._arith import (absmax, frozen, int_array, norm, obj_array, rat,
                     scatter_sum)


class _Value:
    _fields = ()

    def __eq__(self, other):
        if type(self) is not type(other):
            return NotImplemented
        for name in self._fields:
            a, b = getattr(self, name), getattr(other, name)
            if not _same(a, b):
                return False
        return True

    def __hash__(self):
        return id(self)

    def __repr__(self):
        inner = ", ".join(f"{k}={_short(getattr(self, k))}" for k in self._fields)
        return f"{type(self).__name__}({inner})"


def _same(a, b):
    if isinstance(a, np.ndarray) or isinstance(b, np.ndarray):
        if a is None or b is None:
            return a is b
        a, b = np.asarray(a), np.asarray(b)
        return a.shape == b.shape and bool(np.all(a == b)) if a.size else a.shape == b.shape
    if isinstance(a, dict) and isinstance(b, dict):
        return a.keys() == b.keys() and all(_same(a[k], b[k]) for k in a)
    if isinstance(a, (list, tuple)) and isinstance(b, (list, tuple)):
        return len(a) == len(b) and all(_same(x, y) for x, y in zip(a, b))
    return a == b


def _short(v):
    if isinstance(v, np.ndarray):
        return f"<{v.dtype} array len {len(v)}>"
    if isinstance(v, (list, tuple)) and len(v) > 6:
        return f"<{len(v)} items>"
    return repr(v)


# ---------------------------------------------------------------- matrices

class SparseIntMatrix(_Value):
    """m x n integer matrix stored as sorted (row, col, value) triples."""
    _fields = ("m", "n", "rows", "cols", "vals")

    def __init__(self, m, n, entries=()):
        trip = {}
        for i, j, v in entries:
            i, j, v = int(i), int(j), rat(v)
            if not isinstance(v, int):
                raise TypeError(f"matrix entry ({i},{j}) is not an integer")
            if not (0 <= i < m and 0 <= j < n):
                raise ValueError(f"entry ({i},{j}) outside {m}x{n}")
            if (i, j) in trip:
                raise ValueError(f"duplicate entry ({i},{j})")
            if v != 0:
                trip[(i, j)] = v
        keys = sorted(trip)
        self._set(m, n, int_array([k[0] for k in keys]), int_array([k[1] for k in keys]),
                  obj_array([trip[k] for k in keys]))

    def _set(self, m, n, rows, cols, vals):
        self.m, self.n = int(m), int(n)
        self.rows, self.cols, self.vals = frozen(rows), frozen(cols), frozen(vals)
        self._rowptr = np.searchsorted(rows, np.arange(self.m + 1))

    @classmethod
    def from_arrays(cls, m, n, rows, cols, vals, presorted=False):
        """Trusted constructor from parallel arrays (zeros dropped)."""
        rows, cols = int_array(rows), int_array(cols)
        vals = vals if isinstance(vals, np.ndarray) and vals.dtype == object else obj_array(vals)
        keep = np.array([v != 0 for v in vals], dtype=bool) if len(vals) else np.zeros(0, bool)
        rows, cols, vals = rows[keep], cols[keep], vals[keep]
        if not presorted:
            order = np.lexsort((cols, rows))
            rows, cols, vals = rows[order], cols[order], vals[order]
        if len(rows) > 1:
            dup = (rows[1:] == rows[:-1]) & (cols[1:] == cols[:-1])
            if dup.any():
                k = int(np.flatnonzero(dup)[0])
                raise ValueError(f"duplicate entry ({rows[k]},{cols[k]})")
        self = cls.__new__(cls)
        self._set(m, n, rows.copy(), cols.copy(), vals.copy())
        return self

    @classmethod
    def from_dense(cls, rows):
        rows = [list(r) for r in rows]
        m = len(rows)
        n = len(rows[0]) if m else 0
        return cls(m, n, ((i, j, v) for i, r in enumerate(rows) for j, v in enumerate(r)))

    @property
    def nnz(self):
        return len(self.vals)

    @property
    def shape(self):
        return (self.m, self.n)

    def row(self, i):
        a, b = self._rowptr[i], self._rowptr[i + 1]
        return list(zip(self.cols[a:b].tolist(), self.vals[a:b].tolist()))

    def row_bounds(self, i):
        return int(self._rowptr[i]), int(self._rowptr[i + 1])

    def triples(self):
        return list(zip(self.rows.tolist(), self.cols.tolist(), self.vals.tolist()))

    def dense(self):
        out = [[0] * self.n for _ in range(self.m)]
        for i, j, v in self.triples():
            out[i][j] = v
        return out

    def matvec(self, x):
        x = x if isinstance(x, np.ndarray) and x.dtype == object else obj_array(x)
        if len(x) != self.n:
            raise ValueError(f"vector length {len(x)} != {self.n} columns")
        if self.nnz == 0:
            return np.zeros(self.m, dtype=object)
        prods = self.vals * x[self.cols]
        return scatter_sum(self.rows, prods, self.m, perm=np.arange(len(self.rows)))

    def absmax(self):
        return absmax(self.vals)


def _vec(values, what, integral=True):
    arr = obj_array(values)
    if integral and any(not isinstance(v, int) for v in arr):
        raise TypeError(f"{what} must be integral")
    return frozen(arr)


# ---------------------------------------------------------- algebraic forms

class LpInstance(_Value):
    """Decision LP: is there x >= 0 with Ax <= b and c^T x >= K (||x||_1 <= R)."""
    _fields = ("A", "b", "c", "K", "R")

    def __init__(self, A, b, c, K, R):
        if not isinstance(A, SparseIntMatrix):
            A = SparseIntMatrix.from_dense(A)
        self.A = A
        self.b = _vec(b, "b")
        self.c = _vec(c, "c")
        self.K = rat(K)
        self.R = rat(R)
        if not isinstance(self.K, int) or not isinstance(self.R, int):
            raise TypeError("K and R must be integers")

    @property
    def m(self):
        return self.A.m

    @property
    def n(self):
        return self.A.n


class LenInstance(_Value):
    """Ax = b, x >= 0 (with radius R)."""
    _fields = ("A", "b", "R")

    def __init__(self, A, b, R):
        if not isinstance(A, SparseIntMatrix):
            A = SparseIntMatrix.from_dense(A)
        self.A = A
        self.b = _vec(b, "b")
        self.R = rat(R)

    @property
    def m(self):
        return self.A.m

    @property
    def n(self):
        return self.A.n


class KLenInstance(LenInstance):
    """LEN whose coefficients all lie in [-k, k]."""
    _fields = ("A", "b", "R", "k")

    def __init__(self, A, b, R, k):
        super().__init__(A, b, R)
        self.k = int(k)


# ------------------------------------------------------------------ graphs

class FlowGraph(_Value):
    """Directed multigraph; edge id = position in the edge arrays."""
    _fields = ("n", "tail", "head", "cap")

    def __init__(self, n, tail, head, cap, copy=True):
        self.n = int(n)
        self.tail = frozen(int_array(tail).copy() if copy else int_array(tail))
        self.head = frozen(int_array(head).copy() if copy else int_array(head))
        if isinstance(cap, np.ndarray) and cap.dtype == object:
            self.cap = frozen(cap.copy() if copy else cap)
        else:
            self.cap = frozen(obj_array(cap))
        if not (len(self.tail) == len(self.head) == len(self.cap)):
            raise ValueError("edge arrays differ in length")
        self._cache = {}

    @classmethod
    def from_edges(cls, n, edges):
        """edges: iterable of (tail, head, cap) in id order."""
        edges = list(edges)
        return cls(n, [e[0] for e in edges], [e[1] for e in edges], [e[2] for e in edges])

    @property
    def m(self):
        return len(self.tail)

    def edges(self):
        return list(zip(range(self.m), self.tail.tolist(), self.head.tolist(), self.cap.tolist()))

    def _perm(self, key):
        p = self._cache.get(key)
        if p is None:
            p = np.argsort(self.tail if key == "out" else self.head, kind="stable")
            self._cache[key] = p
        return p

    def outflow(self, f):
        return scatter_sum(self.tail, f, self.n, self._perm("out"))

    def inflow(self, f):
        return scatter_sum(self.head, f, self.n, self._perm("in"))

    def out_edges(self, v):
        return np.flatnonzero(self.tail == v)

    def in_edges(self, v):
        return np.flatnonzero(self.head == v)

    def max_capacity(self):
        return absmax(self.cap)

    def total_capacity(self):
        return sum(self.cap.tolist())


def _idset(ids):
    return frozen(np.unique(int_array(ids)))


class FhfInstance(_Value):
    """Single commodity flow with fixed edges F and homologous edge sets."""
    _fields = ("graph", "fixed", "homologous", "s", "t")

    def __init__(self, graph, fixed, homologous, s, t):
        self.graph = graph
        self.fixed = _idset(fixed)
        sets = [np.sort(int_array(h)) for h in homologous]
        sets.sort(key=lambda h: (int(h[0]) if len(h) else -1, len(h)))
        self.homologous = tuple(frozen(h) for h in sets)
        self.s, self.t = int(s), int(t)


class FphfInstance(_Value):
    """FHF whose homologous sets are all pairs (stored as a p x 2 array)."""
    _fields = ("graph", "fixed", "pairs", "s", "t")

    def __init__(self, graph, fixed, pairs, s, t):
        self.graph = graph
        self.fixed = _idset(fixed)
        p = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
        p = np.sort(p, axis=1)
        p = p[np.lexsort((p[:, 1], p[:, 0]))] if len(p) else p
        self.pairs = frozen(p)
        self.s, self.t = int(s), int(t)

    @property
    def homologous(self):
        return tuple(frozen(r.copy()) for r in self.pairs)


class SffInstance(_Value):
    _fields = ("graph", "fixed", "S1", "S2", "s1", "t1", "s2", "t2")

    def __init__(self, graph, fixed, S1, S2, s1, t1, s2, t2):
        self.graph = graph
        self.fixed = _idset(fixed)
        self.S1, self.S2 = _idset(S1), _idset(S2)
        self.s1, self.t1, self.s2, self.t2 = int(s1), int(t1), int(s2), int(t2)

    @property
    def terminals(self):
        return (self.s1, self.t1, self.s2, self.t2)


class TwoCffInstance(_Value):
    _fields = ("graph", "fixed", "s1", "t1", "s2", "t2")

    def __init__(self, graph, fixed, s1, t1, s2, t2):
        self.graph = graph
        self.fixed = _idset(fixed)
        self.s1, self.t1, self.s2, self.t2 = int(s1), int(t1), int(s2), int(t2)

    @property
    def terminals(self):
        return (self.s1, self.t1, self.s2, self.t2)


class TwoCfrInstance(_Value):
    _fields = ("graph", "s1", "t1", "s2", "t2", "R1", "R2")

    def __init__(self, graph, s1, t1, s2, t2, R1, R2):
        self.graph = graph
        self.s1, self.t1, self.s2, self.t2 = int(s1), int(t1), int(s2), int(t2)
        self.R1, self.R2 = rat(R1), rat(R2)

    @property
    def terminals(self):
        return (self.s1, self.t1, self.s2, self.t2)


class TwoCfInstance(_Value):
    _fields = ("graph", "s1", "t1", "s2", "t2", "R")

    def __init__(self, graph, s1, t1, s2, t2, R):
        self.graph = graph
        self.s1, self.t1, self.s2, self.t2 = int(s1), int(t1), int(s2), int(t2)
        self.R = rat(R)

    @property
    def terminals(self):
        return (self.s1, self.t1, self.s2, self.t2)


# --------------------------------------------------------------- solutions

class NonnegVector(_Value):
    _fields = ("values",)

    def __init__(self, values):
        self.values = frozen(values.copy() if isinstance(values, np.ndarray)
                             and values.dtype == object else obj_array(values))
        if any(v < 0 for v in self.values):
            raise ValueError("vector has a negative entry")

    def __len__(self):
        return len(self.values)

    def __getitem__(self, i):
        return self.values[i]

    def tolist(self):
        return self.values.tolist()


class TwoCommodityFlow(_Value):
    """Per-edge flow values; f2 is None for single-commodity problems."""
    _fields = ("f1", "f2")

    def __init__(self, f1, f2=None):
        self.f1 = frozen(_flowvec(f1))
        self.f2 = None if f2 is None else frozen(_flowvec(f2))
        if self.f2 is not None and len(self.f2) != len(self.f1):
            raise ValueError("commodity vectors differ in length")
        for f in (self.f1, self.f2):
            if f is not None and len(f) and min(_sign_keys(f.tolist())) < 0:
                raise ValueError("flow has a negative entry")

    @property
    def single(self):
        return self.f2 is None

    @property
    def m(self):
        return len(self.f1)

    def total(self):
        return self.f1 if self.f2 is None else self.f1 + self.f2

    def commodity(self, i):
        return self.f1 if i == 1 else self.f2


def _sign_keys(vals):
    # same sign as each value, without Fraction comparisons
    return [v.numerator if type(v) is Fraction else v for v in vals]


def _flowvec(f):
    if isinstance(f, np.ndarray) and f.dtype == object:
        vals = f.reshape(-1).tolist()
    elif isinstance(f, list):
        vals = f
    else:
        return obj_array(f)
    kinds = set(map(type, vals))
    if not kinds <= {int, Fraction}:
        return obj_array(vals)
    out = np.empty(len(vals), dtype=object)
    if kinds <= {int}:
        out[:] = vals
    else:
        out[:] = [v.numerator if type(v) is Fraction and v.denominator == 1 else v
                  for v in vals]
    return out


def as_vector(x):
    return x if isinstance(x, NonnegVector) else NonnegVector(x)


def as_flow(f):
    if isinstance(f, TwoCommodityFlow):
        return f
    if isinstance(f, tuple) and len(f) == 2:
        return TwoCommodityFlow(*f)
    return TwoCommodityFlow(f)


# -------------------------------------------------------------- statistics

def compute_X(*objects):
    """Largest absolute entry over matrices, vectors and scalars."""
    if not objects:
        raise ValueError("compute_X needs at least one argument")
    best = 0
    for o in objects:
        if isinstance(o, SparseIntMatrix):
            v = o.absmax()
        elif isinstance(o, NonnegVector):
            v = absmax(o.values)
        elif isinstance(o, np.ndarray):
            v = absmax(o.astype(object)) if o.size else 0
        elif isinstance(o, (list, tuple)):
            v = compute_X(*o) if o else 0
        else:
            v = abs(rat(o))
        best = max(best, v)
    return best


def size_stats(inst):
    """Size statistics used by reports and the lemma checks."""
    if isinstance(inst, (LpInstance,)):
        return {"n": inst.n, "m": inst.m, "nnz": inst.A.nnz,
                "X": compute_X(inst.A, inst.b, inst.c, inst.K), "R": inst.R}
    if isinstance(inst, LenInstance):
        d = {"n": inst.n, "m": inst.m, "nnz": inst.A.nnz,
             "X": compute_X(inst.A, inst.b), "R": inst.R}
        if isinstance(inst, KLenInstance):
            d["k"] = inst.k
        return d
    g = inst.graph
    d = {"V": g.n, "E": g.m, "max_cap": g.max_capacity()}
    if hasattr(inst, "fixed"):
        d["F"] = len(inst.fixed)
    if isinstance(inst, FhfInstance):
        d["h"] = len(inst.homologous)
        d["H_edges"] = int(sum(len(h) for h in inst.homologous))
    if isinstance(inst, FphfInstance):
        d["p"] = len(inst.pairs)
    if isinstance(inst, SffInstance):
        d["S1"], d["S2"] = len(inst.S1), len(inst.S2)
    if isinstance(inst, TwoCfrInstance):
        d["R1"], d["R2"] = inst.R1, inst.R2
    if isinstance(inst, TwoCfInstance):
        d["R"] = inst.R
    return d


# --------------------------------------------------------------- validation

def validate(inst):
    """List every violated structural condition ([] when well formed)."""
    out = []
    if isinstance(inst, LpInstance):
        A = inst.A
        if len(inst.b) != A.m:
            out.append(f"dimension: len(b)={len(inst.b)} but A has {A.m} rows")
        if len(inst.c) != A.n:
            out.append(f"dimension: len(c)={len(inst.c)} but A has {A.n} columns")
        if inst.R < 1:
            out.append("radius: R must be >= 1")
        if A.m < 1 or A.n < 1:
            out.append("dimension: need at least one row and one column")
        if A.nnz < max(A.m, A.n):
            out.append(f"sparsity: nnz(A)={A.nnz} < max(m,n)={max(A.m, A.n)}")
        return out
    if isinstance(inst, LenInstance):
        if len(inst.b) != inst.A.m:
            out.append(f"dimension: len(b)={len(inst.b)} but A has {inst.A.m} rows")
        if inst.R < 1:
            out.append("radius: R must be >= 1")
        if isinstance(inst, KLenInstance):
            if inst.k < 1:
                out.append("coefficient bound: k must be positive")
            elif inst.A.absmax() > inst.k:
                out.append(f"coefficient bound: entry of size {inst.A.absmax()} exceeds k={inst.k}")
        return out
    g = getattr(inst, "graph", None)
    if not isinstance(g, FlowGraph):
        return [f"unknown instance type {type(inst).__name__}"]
    out += _graph_violations(g)
    term = [getattr(inst, k) for k in ("s", "t", "s1", "t1", "s2", "t2") if hasattr(inst, k)]
    for v in term:
        if not 0 <= v < g.n:
            out.append(f"terminal {v} is not a vertex")
    if len(set(term)) != len(term):
        out.append("terminals: not distinct")
    fixed = getattr(inst, "fixed", None)
    if fixed is not None:
        out += _ids_ok(fixed, g.m, "fixed")
    if isinstance(inst, (FhfInstance, FphfInstance)):
        sets = inst.homologous
        seen = {}
        for k, h in enumerate(sets):
            out += _ids_ok(h, g.m, f"homologous set {k}")
            for e in h.tolist():
                if e in seen:
                    out.append(f"homologous overlap: edge {e} in sets {seen[e]} and {k}")
                seen[e] = k
        if fixed is not None:
            bad = sorted(set(seen) & set(fixed.tolist()))
            if bad:
                out.append(f"fixed/homologous overlap: edges {bad[:5]}")
        if isinstance(inst, FphfInstance):
            if any(len(h) != 2 or h[0] == h[1] for h in sets):
                out.append("pair homology: every set must have exactly two edges")
    if isinstance(inst, SffInstance):
        out += _ids_ok(inst.S1, g.m, "S1") + _ids_ok(inst.S2, g.m, "S2")
        both = np.intersect1d(inst.S1, inst.S2)
        if len(both):
            out.append(f"selective overlap: edges {both[:5].tolist()} in S1 and S2")
    if isinstance(inst, TwoCfrInstance) and (inst.R1 < 0 or inst.R2 < 0):
        out.append("requirement: R1, R2 must be nonnegative")
    if isinstance(inst, TwoCfInstance) and inst.R < 0:
        out.append("requirement: R must be nonnegative")
    return out


def _graph_violations(g):
    out = []
    if g.m:
        lo = min(int(g.tail.min()), int(g.head.min()))
        hi = max(int(g.tail.max()), int(g.head.max()))
        if lo < 0 or hi >= g.n:
            out.append("dangling vertex: edge endpoint outside the vertex range")
        # the graph is immutable, so the capacity scan is done once
        bad = g._cache.get("bad_caps")
        if bad is None:
            caps = g.cap.tolist()
            if set(map(type, caps)) <= {int} and min(caps) > 0:
                bad = []
            else:
                bad = [i for i, c in enumerate(caps) if not (type(c) is int and c > 0)]
            g._cache["bad_caps"] = bad
        if bad:
            out.append(f"capacity: edges {bad[:5]} do not have a positive integer capacity")
    return out


def _ids_ok(ids, m, what):
    if len(ids) and (int(ids.min()) < 0 or int(ids.max()) >= m):
        return [f"dangling edge id in {what}"]
    return []


# ----------------------------------------------------------------- rounding

def round_lp_to_integers(A, b, c, R, kappa, eps, K=None):
    """Round a rational LP onto a common grid and scale it to integers.

    A is rounded down, b and c (and K, if given) are rounded in the
    directions that keep every original solution approximately feasible: A
    down, b up, c up, K down.  The grid step is 1/D with
    D = ceil(1 / min(eps/(3R), U/(kappa R))), U the largest |entry|.
    Integral input is returned unchanged.  Returns (LpInstance, D).
    """
    kappa, eps, R = rat(kappa), rat(eps), rat(R)
    if kappa <= 0:
        raise ValueError("kappa must be positive")
    if eps <= 0:
        raise ValueError("eps must be positive")
    if R < 1:
        raise ValueError("R must be >= 1")
    rowsA = [[rat(v) for v in r] for r in A]
    b = [rat(v) for v in b]
    c = [rat(v) for v in c]
    Kv = rat(K) if K is not None else 0
    flat = [v for r in rowsA for v in r] + b + c + ([Kv] if K is not None else [])
    if all(isinstance(v, int) for v in flat):
        return LpInstance(rowsA, b, c, Kv, R), 1
    U = max(abs(v) for v in flat)
    delta = min(Fraction(eps, 3 * R), Fraction(U) / (kappa * R))
    D = ceil(1 / delta)
    Ai = [[floor(v * D) for v in r] for r in rowsA]
    bi = [ceil(v * D) for v in b]
    ci = [ceil(v * D) for v in c]
    Ki = floor(Kv * D)
    return LpInstance(Ai, bi, ci, Ki, R), D


def grid_lcm(values):
    d = 1
    for v in values:
        v = rat(v)
        if isinstance(v, Fraction):
            d = lcm(d, v.denominator)
    return d

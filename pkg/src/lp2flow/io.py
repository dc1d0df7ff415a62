"""Canonical text documents for every value type.

A document is one JSON object with "schema", "version" and a payload.
Numbers that can be large (coefficients, capacities, flow values, eps) are
decimal strings, "p/q" for non-integers; ids and vertex indices are plain
JSON integers.  Output has sorted keys and no optional whitespace, so equal
values give byte-identical text.  Input must already be canonical: "4/2"
or "+3" is rejected, not repaired.
"""
import json
import re
from fractions import Fraction

import numpy as np

from ._arith import fmt
from .mapback import LEVELS, ErrorBudget
from .model import (FhfInstance, FlowGraph, FphfInstance, KLenInstance,
                    LenInstance, LpInstance, NonnegVector, SffInstance,
                    SparseIntMatrix, TwoCffInstance, TwoCfInstance,
                    TwoCfrInstance, TwoCommodityFlow, validate)
from .pipeline import Audit, CompileReport
from .reduce import STAGES, Trace
from .verify import ErrorReport

VERSION = 1
SCHEMAS = ("lp", "len", "klen", "fhf", "fphf", "sff", "2cff", "2cfr", "2cf",
           "vector-solution", "flow-solution", "trace", "budget", "report")

_RAT = re.compile(r"^-?(0|[1-9][0-9]*)(/[1-9][0-9]*)?$")


class ParseError(ValueError):
    """A document problem, with the field path where it was found."""

    def __init__(self, where, msg):
        self.where = where
        self.msg = msg
        super().__init__(f"{where}: {msg}" if where else msg)


# ---------------------------------------------------------------- writing

def _num(v):
    return fmt(v)


def _nums(arr):
    return [fmt(v) for v in (arr.tolist() if isinstance(arr, np.ndarray) else arr)]


def _ids(arr):
    return [int(v) for v in (arr.tolist() if isinstance(arr, np.ndarray) else arr)]


def _matrix(A):
    return {"m": A.m, "n": A.n,
            "entries": [[i, j, fmt(v)] for i, j, v in A.triples()]}


def _graph(g):
    return {"vertices": g.n,
            "edges": [[e, t, h, fmt(c)] for e, t, h, c in g.edges()]}


def _payload(v):
    if isinstance(v, LpInstance):
        return "lp", {"A": _matrix(v.A), "b": _nums(v.b), "c": _nums(v.c),
                      "K": _num(v.K), "R": _num(v.R)}
    if isinstance(v, KLenInstance):
        return "klen", {"A": _matrix(v.A), "b": _nums(v.b), "R": _num(v.R), "k": v.k}
    if isinstance(v, LenInstance):
        return "len", {"A": _matrix(v.A), "b": _nums(v.b), "R": _num(v.R)}
    if isinstance(v, FphfInstance):
        return "fphf", {"graph": _graph(v.graph), "fixed": _ids(v.fixed),
                        "pairs": [_ids(p) for p in v.pairs], "s": v.s, "t": v.t}
    if isinstance(v, FhfInstance):
        return "fhf", {"graph": _graph(v.graph), "fixed": _ids(v.fixed),
                       "homologous": [_ids(h) for h in v.homologous], "s": v.s, "t": v.t}
    if isinstance(v, SffInstance):
        return "sff", {"graph": _graph(v.graph), "fixed": _ids(v.fixed),
                       "S1": _ids(v.S1), "S2": _ids(v.S2), "s1": v.s1, "t1": v.t1,
                       "s2": v.s2, "t2": v.t2}
    if isinstance(v, TwoCffInstance):
        return "2cff", {"graph": _graph(v.graph), "fixed": _ids(v.fixed),
                        "s1": v.s1, "t1": v.t1, "s2": v.s2, "t2": v.t2}
    if isinstance(v, TwoCfrInstance):
        return "2cfr", {"graph": _graph(v.graph), "s1": v.s1, "t1": v.t1, "s2": v.s2,
                        "t2": v.t2, "R1": _num(v.R1), "R2": _num(v.R2)}
    if isinstance(v, TwoCfInstance):
        return "2cf", {"graph": _graph(v.graph), "s1": v.s1, "t1": v.t1, "s2": v.s2,
                       "t2": v.t2, "R": _num(v.R)}
    if isinstance(v, NonnegVector):
        return "vector-solution", {"values": _nums(v.values)}
    if isinstance(v, TwoCommodityFlow):
        return "flow-solution", {"f1": _nums(v.f1),
                                 "f2": None if v.f2 is None else _nums(v.f2)}
    if isinstance(v, Trace):
        return "trace", _trace(v)
    if isinstance(v, (list, tuple)) and v and all(isinstance(t, Trace) for t in v):
        return "trace", {"chain": [_trace(t) for t in v]}
    if isinstance(v, ErrorBudget):
        return "budget", {"values": {k: fmt(v[k]) for k in LEVELS}}
    if isinstance(v, ErrorReport):
        return "report", {"kind": "error", "problem": v.problem, "eps": fmt(v.eps),
                          "tau": {k: fmt(x) for k, x in v.tau.items()},
                          "where": {k: _plain(x) for k, x in v.where.items()},
                          "flags": list(v.flags)}
    if isinstance(v, CompileReport):
        return "report", {
            "kind": "compile",
            "sizes": [[name, {k: fmt(x) for k, x in st.items()}] for name, st in v.sizes],
            "budget": None if v.budget is None else _payload(v.budget)[1],
            "audits": [[a.name, a.ok, fmt(a.lhs), a.op, fmt(a.rhs)] for a in v.audits],
            "flags": list(v.flags)}
    raise TypeError(f"cannot serialize {type(v).__name__}")


def _trace(t):
    data = {}
    for k, x in t.data.items():
        data[k] = _ids(x) if isinstance(x, np.ndarray) else fmt(x)
    return {"stage": t.stage, "data": data}


def _plain(x):
    if isinstance(x, (tuple, list)):
        return [_plain(y) for y in x]
    if isinstance(x, (int, np.integer)):
        return int(x)
    return x


def to_document(value):
    schema, payload = _payload(value)
    doc = {"schema": schema, "version": VERSION}
    doc.update(payload)
    return doc


def serialize(value):
    """Canonical text of a value (ends with a newline)."""
    return json.dumps(to_document(value), sort_keys=True, separators=(",", ":")) + "\n"


# ---------------------------------------------------------------- reading

def _rat(s, where):
    if not isinstance(s, str):
        raise ParseError(where, f"expected a number string, got {type(s).__name__}")
    if not _RAT.match(s):
        raise ParseError(where, f"malformed rational {s!r}")
    if "/" in s:
        p, q = s.split("/")
        p, q = int(p), int(q)
        f = Fraction(p, q)
        if f.numerator != p or f.denominator != q or q == 1:
            raise ParseError(where, f"rational {s!r} is not reduced")
        return f
    return int(s)


def _int_field(d, key, where):
    if key not in d:
        raise ParseError(where, f"missing field {key!r}")
    v = d[key]
    if not isinstance(v, int) or isinstance(v, bool):
        raise ParseError(f"{where}.{key}", "expected an integer")
    return v


def _field(d, key, where):
    if key not in d:
        raise ParseError(where, f"missing field {key!r}")
    return d[key]


def _rats(lst, where):
    if not isinstance(lst, list):
        raise ParseError(where, "expected a list")
    return [_rat(s, f"{where}[{k}]") for k, s in enumerate(lst)]


def _idlist(lst, where):
    if not isinstance(lst, list) or not all(isinstance(v, int) and not isinstance(v, bool) for v in lst):
        raise ParseError(where, "expected a list of integer ids")
    return lst


def _read_matrix(d, where):
    m = _int_field(d, "m", where)
    n = _int_field(d, "n", where)
    seen = set()
    trip = []
    for k, t in enumerate(_field(d, "entries", where)):
        w = f"{where}.entries[{k}]"
        if not (isinstance(t, list) and len(t) == 3):
            raise ParseError(w, "expected [row, col, value]")
        i, j = t[0], t[1]
        if not (isinstance(i, int) and isinstance(j, int)):
            raise ParseError(w, "row and col must be integers")
        if (i, j) in seen:
            raise ParseError(w, f"duplicate matrix entry ({i},{j})")
        seen.add((i, j))
        v = _rat(t[2], w)
        if not isinstance(v, int):
            raise ParseError(w, "matrix entries must be integers")
        if v == 0:
            raise ParseError(w, "stored zero entry")
        if not (0 <= i < m and 0 <= j < n):
            raise ParseError(w, f"entry ({i},{j}) outside {m}x{n}")
        trip.append((i, j, v))
    return SparseIntMatrix(m, n, trip)


def _read_graph(d, where):
    n = _int_field(d, "vertices", where)
    edges = _field(d, "edges", where)
    if not isinstance(edges, list):
        raise ParseError(where, "edges must be a list")
    rows = []
    for k, e in enumerate(edges):
        w = f"{where}.edges[{k}]"
        if not (isinstance(e, list) and len(e) == 4 and all(isinstance(x, int) for x in e[:3])):
            raise ParseError(w, "expected [id, tail, head, cap]")
        if not (0 <= e[1] < n and 0 <= e[2] < n):
            raise ParseError(w, f"edge endpoint outside 0..{n - 1}")
        cap = _rat(e[3], w)
        if not isinstance(cap, int) or cap <= 0:
            raise ParseError(w, "capacity must be a positive integer")
        rows.append((e[0], e[1], e[2], cap))
    rows.sort(key=lambda r: r[0])
    if [r[0] for r in rows] != list(range(len(rows))):
        raise ParseError(where, "edge ids must be exactly 0..m-1 without repeats")
    return FlowGraph.from_edges(n, [(t, h, c) for _, t, h, c in rows])


def _check_ids(ids, m, where):
    for k, e in enumerate(ids):
        if not 0 <= e < m:
            raise ParseError(f"{where}[{k}]", f"dangling edge id {e}")
    return ids


def _build(schema, d):
    w = schema
    if schema == "lp":
        return LpInstance(_read_matrix(_field(d, "A", w), "A"), _rats(_field(d, "b", w), "b"),
                          _rats(_field(d, "c", w), "c"), _rat(_field(d, "K", w), "K"),
                          _rat(_field(d, "R", w), "R"))
    if schema in ("len", "klen"):
        A = _read_matrix(_field(d, "A", w), "A")
        b = _rats(_field(d, "b", w), "b")
        R = _rat(_field(d, "R", w), "R")
        if schema == "klen":
            return KLenInstance(A, b, R, _int_field(d, "k", w))
        return LenInstance(A, b, R)
    if schema in ("fhf", "fphf", "sff", "2cff", "2cfr", "2cf"):
        g = _read_graph(_field(d, "graph", w), "graph")
        fixed = None
        if schema in ("fhf", "fphf", "sff", "2cff"):
            fixed = _check_ids(_idlist(_field(d, "fixed", w), "fixed"), g.m, "fixed")
        if schema == "fhf":
            sets = _field(d, "homologous", w)
            hs = [_check_ids(_idlist(h, f"homologous[{k}]"), g.m, f"homologous[{k}]")
                  for k, h in enumerate(sets)]
            return FhfInstance(g, fixed, hs, _int_field(d, "s", w), _int_field(d, "t", w))
        if schema == "fphf":
            pairs = _field(d, "pairs", w)
            ps = []
            for k, p in enumerate(pairs):
                p = _check_ids(_idlist(p, f"pairs[{k}]"), g.m, f"pairs[{k}]")
                if len(p) != 2:
                    raise ParseError(f"pairs[{k}]", "a pair needs exactly two edge ids")
                ps.append(p)
            return FphfInstance(g, fixed, ps, _int_field(d, "s", w), _int_field(d, "t", w))
        term = [_int_field(d, k, w) for k in ("s1", "t1", "s2", "t2")]
        if schema == "sff":
            S1 = _check_ids(_idlist(_field(d, "S1", w), "S1"), g.m, "S1")
            S2 = _check_ids(_idlist(_field(d, "S2", w), "S2"), g.m, "S2")
            return SffInstance(g, fixed, S1, S2, *term)
        if schema == "2cff":
            return TwoCffInstance(g, fixed, *term)
        if schema == "2cfr":
            return TwoCfrInstance(g, *term, _rat(_field(d, "R1", w), "R1"),
                                  _rat(_field(d, "R2", w), "R2"))
        return TwoCfInstance(g, *term, _rat(_field(d, "R", w), "R"))
    if schema == "vector-solution":
        vals = _rats(_field(d, "values", w), "values")
        if any(v < 0 for v in vals):
            raise ParseError("values", "negative entry in a nonnegative vector")
        return NonnegVector(vals)
    if schema == "flow-solution":
        f1 = _rats(_field(d, "f1", w), "f1")
        f2 = d.get("f2")
        f2 = None if f2 is None else _rats(f2, "f2")
        if any(v < 0 for v in f1 + (f2 or [])):
            raise ParseError("f1/f2", "negative flow value")
        if f2 is not None and len(f2) != len(f1):
            raise ParseError("f2", "commodities differ in length")
        return TwoCommodityFlow(f1, f2)
    if schema == "trace":
        if "chain" in d:
            chain = _field(d, "chain", w)
            if not isinstance(chain, list):
                raise ParseError("chain", "expected a list of traces")
            return [_read_trace(t, f"chain[{k}]") for k, t in enumerate(chain)]
        return _read_trace(d, "")
    if schema == "budget":
        vals = _field(d, "values", w)
        return ErrorBudget({k: _rat(_field(vals, k, "values"), f"values.{k}") for k in LEVELS})
    if schema == "report":
        kind = _field(d, "kind", w)
        if kind == "error":
            where = {k: (tuple(v) if isinstance(v, list) else v)
                     for k, v in _field(d, "where", w).items()}
            return ErrorReport(_field(d, "problem", w), _rat(_field(d, "eps", w), "eps"),
                               {k: _rat(v, f"tau.{k}") for k, v in _field(d, "tau", w).items()},
                               where, _field(d, "flags", w))
        if kind == "compile":
            sizes = [(name, {k: _rat(v, f"sizes.{name}.{k}") for k, v in st.items()})
                     for name, st in _field(d, "sizes", w)]
            b = d.get("budget")
            budget = None if b is None else _build("budget", b)
            audits = []
            for k, a in enumerate(_field(d, "audits", w)):
                name, ok, lhs, op, rhs = a
                au = Audit(name, _rat(lhs, f"audits[{k}]"), op, _rat(rhs, f"audits[{k}]"))
                if au.ok != ok:
                    raise ParseError(f"audits[{k}]", "recorded verdict disagrees with its numbers")
                audits.append(au)
            return CompileReport(sizes, budget, audits, _field(d, "flags", w))
        raise ParseError("kind", f"unknown report kind {kind!r}")
    raise ParseError("schema", f"unknown schema {schema!r}")


def _read_trace(d, where):
    pre = f"{where}." if where else ""
    if not isinstance(d, dict):
        raise ParseError(where, "expected a trace object")
    stage = _field(d, "stage", where)
    if stage not in STAGES:
        raise ParseError(pre + "stage", f"unknown stage {stage!r}")
    data = {}
    raw = _field(d, "data", where)
    if not isinstance(raw, dict):
        raise ParseError(pre + "data", "expected an object")
    for k, x in raw.items():
        if isinstance(x, list):
            data[k] = np.asarray(_idlist(x, f"{pre}data.{k}"), dtype=np.int64)
        else:
            data[k] = _rat(x, f"{pre}data.{k}")
    return Trace(stage, data)


_DEF = {"lp": "LP", "len": "LEN", "klen": "k-LEN", "fhf": "FHF", "fphf": "FPHF",
        "sff": "SFF", "2cff": "2CFF", "2cfr": "2CFR", "2cf": "2CF"}


def from_document(doc):
    if not isinstance(doc, dict):
        raise ParseError("", "document must be a JSON object")
    schema = doc.get("schema")
    if schema not in SCHEMAS:
        raise ParseError("schema", f"unknown schema {schema!r}")
    if doc.get("version") != VERSION:
        raise ParseError("version", f"unsupported version {doc.get('version')!r}")
    try:
        value = _build(schema, doc)
    except ParseError:
        raise
    except (TypeError, ValueError) as exc:
        raise ParseError(schema, str(exc))
    if schema in _DEF:
        bad = validate(value)
        if bad:
            raise ParseError(schema, f"violates the {_DEF[schema]} definition: " + "; ".join(bad))
    return value


def parse(text):
    """Value from canonical text; raises ParseError with a location."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"line {exc.lineno} col {exc.colno}", f"invalid JSON: {exc.msg}")
    return from_document(doc)


def read(path):
    with open(path, encoding="utf-8") as fh:
        return parse(fh.read())


def write(path, value):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(serialize(value))


# ------------------------------------------------------------- rendering

def render_equations(klen, trace=None, names=None, rows=None):
    """Human-readable equations, one per line.

    With a len-2len trace, carry pairs print as "(c0 - d0)" in the style of
    the bit decomposition; otherwise variables print as x1, x2, ...
    `rows` restricts the output to those row indices.
    """
    A, b = klen.A, klen.b.tolist()
    label = {}
    pairs = {}
    if trace is not None and trace.stage == "len-2len":
        n_in, C, m_in = trace["n_in"], trace["carries"], trace["m_in"]
        starts = trace["carry_start"].tolist()
        for q in range(m_in):
            for l in range(starts[q + 1] - starts[q]):
                k = starts[q] + l
                tag = f"{l}" if m_in == 1 else f"{q}_{l}"
                label[n_in + k] = f"c{tag}"
                label[n_in + C + k] = f"d{tag}"
                label[n_in + 2 * C + k] = f"sc{tag}"
                label[n_in + 3 * C + k] = f"sd{tag}"
                pairs[n_in + k] = n_in + C + k
    lines = []
    for i in (range(A.m) if rows is None else rows):
        row = dict(A.row(i))
        terms = []
        for j in sorted(row):
            if j not in row:
                continue
            a = row[j]
            if j in pairs and row.get(pairs[j]) == -a:
                d = pairs[j]
                row.pop(d)
                terms.append((a, f"({label[j]} - {label[d]})"))
            else:
                terms.append((a, label.get(j, (names or {}).get(j, f"x{j + 1}"))))
        lines.append(_join(terms) + f" = {fmt(b[i])}")
    return "\n".join(lines) + "\n"


def bit_rows(trace):
    """Row indices of the bit equations (not the carry bounds) of a
    len-2len trace."""
    out = []
    for r0, nq in zip(trace["row_start"].tolist(), trace["N"].tolist()):
        out += range(r0, r0 + nq + 1)
    return out


def _join(terms):
    out = ""
    for k, (a, name) in enumerate(terms):
        mag = abs(a)
        body = name if mag == 1 else f"{mag}{name}"
        if k == 0:
            out = ("-" if a < 0 else "") + body
        else:
            out += (" - " if a < 0 else " + ") + body
    return out or "0"

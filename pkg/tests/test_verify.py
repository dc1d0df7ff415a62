import random
from fractions import Fraction

import pytest

from _gen import feasible_lp
from lp2flow import (FlowGraph, LenInstance, NonnegVector, SffInstance, SparseIntMatrix,
                     TwoCfInstance, TwoCommodityFlow, check, compile)
from lp2flow import io
from lp2flow.verify import (flow_value, lp_encoded_adjust, requirement_gap,
                            split_requirement)
from lp2flow.witness import witness_all


def test_flow_value_cases():
    g = FlowGraph.from_edges(4, [(0, 2, 5), (2, 1, 5), (3, 1, 1)])
    cf = TwoCfInstance(g, 0, 1, 3, 2, 1)
    assert flow_value(cf, TwoCommodityFlow([0, 0, 0], [0, 0, 0]), 1) == (0, 0)
    q = Fraction(7, 3)
    assert flow_value(cf, TwoCommodityFlow([q, q, 0], [0, 0, 0]), 1) == (q, q)


def test_lena_residual():
    eps = Fraction(1, 10)
    le = LenInstance(SparseIntMatrix.from_dense([[1, 0], [0, 1]]), [1, 1], 5)
    ok, rep = check("lena", le, NonnegVector([2 + eps, 1]), eps)
    assert not ok and rep.tau["constraint"] == 1 + eps
    assert rep.where["constraint"] == 0


def test_sff_type_error():
    g = FlowGraph.from_edges(4, [(0, 1, 3), (2, 3, 3)])
    s = SffInstance(g, [], [0], [1], 0, 1, 2, 3)
    d = Fraction(1, 50)
    ok, rep = check("sffa", s, TwoCommodityFlow([1, 0], [d, 1]), Fraction(1, 100))
    assert not ok and rep.tau["type"] == d and rep.where["type"] == 0


def test_exact_witness_passes_everywhere():
    rng = random.Random(31)
    lp, x = feasible_lp(rng)
    comp = compile(lp, 0)
    sols = witness_all(lp, x, comp.traces, comp.instances)
    from lp2flow.verify import class_of
    for inst, sol in zip(comp.instances, sols):
        ok, rep = check(class_of(inst), inst, sol, 0)
        assert ok and rep.exact


def test_monotone_in_eps():
    le = LenInstance(SparseIntMatrix.from_dense([[1, 1]]), [1], 5)
    x = NonnegVector([Fraction(1, 2), Fraction(3, 5)])
    ok, rep = check("lena", le, x, Fraction(1, 10))
    assert ok
    for e in (Fraction(1, 9), Fraction(1, 2), 1):
        assert check("lena", le, x, e)[0]


def test_eps_above_one_flagged():
    le = LenInstance(SparseIntMatrix.from_dense([[1]]), [1], 5)
    _, rep = check("lena", le, NonnegVector([1]), 2)
    assert rep.flags


def test_length_mismatch_raises():
    le = LenInstance(SparseIntMatrix.from_dense([[1, 1]]), [1], 5)
    with pytest.raises(ValueError):
        check("lena", le, NonnegVector([1]), 0)


def test_report_survives_serialization():
    le = LenInstance(SparseIntMatrix.from_dense([[3, 1]]), [1], 5)
    x = NonnegVector([Fraction(1, 7), Fraction(2, 3)])
    _, rep = check("lena", le, x, 1)
    _, rep2 = check("lena", le, io.parse(io.serialize(x)), 1)
    assert rep == rep2
    assert io.parse(io.serialize(rep)) == rep


def test_requirement_gap_split():
    R = 10
    o1, d1, o2, d2 = 4, 5, Fraction(9, 2), 4
    tau = requirement_gap(R, o1, d1, o2, d2)
    F1, F2 = split_requirement(R, o1, d1, o2, d2)
    assert F1 + F2 >= R
    assert max(abs(o1 - F1), abs(d1 - F1), abs(o2 - F2), abs(d2 - F2)) == tau


def test_footnote_adjustment():
    g = FlowGraph.from_edges(4, [(0, 1, 4), (2, 3, 4)])
    cf = TwoCfInstance(g, 0, 1, 2, 3, 6)
    eps = Fraction(1, 10)
    flow = TwoCommodityFlow([3, 0], [3 - eps, 0])
    F1, F2, eps2 = lp_encoded_adjust(cf, TwoCommodityFlow([3, 0], [0, 3 - eps]), eps)
    assert F1 + F2 == 6 and eps2 == 2 * eps
    ok, rep = check("2cfa", cf, TwoCommodityFlow([3, 0], [0, 3 - eps]), eps2)
    assert ok
    with pytest.raises(ValueError):
        lp_encoded_adjust(cf, TwoCommodityFlow([1, 0], [0, 1]), eps)

import random
from fractions import Fraction

import pytest

from _gen import feasible_lp
from lp2flow import (KLenInstance, NonnegVector, SparseIntMatrix, TwoCommodityFlow, check,
                     compile, error_budget, reduce_all)
from lp2flow.mapback import (LEVELS, budget_stats, claim_one_sum, map_back,
                             map_back_chain, precondition_flags)
from lp2flow.reduce import twolen_to_onelen
from lp2flow.witness import witness_all


def _stats():
    return {"X_le": 7, "n_2le": 10, "n_1le": 14, "X_1le": 98, "E_h": 30, "E_p": 40,
            "E_s": 90, "E_f": 200}


def test_budget_zero():
    b = error_budget(0, _stats())
    assert all(b[k] == 0 for k in LEVELS)


def test_budget_hand_computed():
    b = error_budget(1, _stats())
    le = Fraction(1)
    two = le / 14
    one = two / 11
    h = one / (5 * 14 * 98)
    p = h / 30
    s = p / (11 * 40)
    f = s / (6 * 90)
    r = f / (12 * 200)
    assert [b[k] for k in LEVELS] == [1, le, two, one, h, p, s, f, r, r / 4]
    assert all(0 <= b[k] <= 1 for k in LEVELS)


def test_budget_rejects_out_of_range():
    for bad in (-1, 2, Fraction(3, 2)):
        with pytest.raises(ValueError):
            error_budget(bad, _stats())


def test_onelen_mapback_averages_twins():
    k = KLenInstance(SparseIntMatrix.from_dense([[2, 1]]), [3], 4, 2)
    out, tr = twolen_to_onelen(k)
    eps = Fraction(1, 100)
    d = Fraction(1, 200)
    # x = 1, x' = 1 + d, y = 1
    sol = NonnegVector([1, 1, 1 + d])
    back = map_back("2len-1len", sol, tr)
    assert back.tolist() == [1 + d / 2, 1]
    ok1, rep1 = check("klena", out, sol, eps)
    assert ok1
    # residual of the 2-LEN row bounded by (k_i + 1) eps^{1le} with k_i = 1 split
    assert check("klena", k, back, 2 * rep1.worst)[0]


def test_missing_coordinates_rejected():
    rng = random.Random(2)
    lp, x = feasible_lp(rng)
    insts, traces = reduce_all(lp)
    with pytest.raises(ValueError):
        map_back("lp-len", NonnegVector([0]), traces[0])
    with pytest.raises(ValueError):
        map_back("len-2len", NonnegVector([0]), traces[0])


def test_chain_reports_within_budget_for_zero_error():
    rng = random.Random(21)
    lp, x = feasible_lp(rng)
    comp = compile(lp, Fraction(1, 10))
    sols = witness_all(lp, x, comp.traces, comp.instances)
    back, reports = map_back_chain(sols[-1], comp.traces, comp.budget, comp.instances)
    assert back == x
    assert len(reports) == 9
    assert all(rb.passed and ra.passed for _, rb, ra in reports)


def test_zero_flow_maps_to_zero():
    # b >= 0, K <= 0: x = 0 is feasible
    from lp2flow import LpInstance
    lp = LpInstance(SparseIntMatrix.from_dense([[1, -2], [3, 1]]), [2, 5], [1, 1], -3, 4)
    comp = compile(lp, 0)
    m = comp.cf.graph.m
    x, _ = map_back_chain(TwoCommodityFlow([0] * m, [0] * m), comp.traces)
    assert x.tolist() == [0, 0]
    assert check("lpa", lp, x, 0)[0]


def test_claim_one_sum_zero_on_witness():
    rng = random.Random(22)
    lp, x = feasible_lp(rng)
    comp = compile(lp, 0)
    sols = witness_all(lp, x, comp.traces, comp.instances)
    assert claim_one_sum(sols[8], comp.instances[7].graph.m) == 0


def test_budget_stats_and_flags():
    rng = random.Random(23)
    lp, _ = feasible_lp(rng)
    insts, _ = reduce_all(lp)
    st = budget_stats(insts)
    assert st["E_f"] == insts[7].graph.m
    assert precondition_flags(insts) == []

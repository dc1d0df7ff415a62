import random
from fractions import Fraction

import numpy as np
import pytest

from _gen import feasible_lp
from lp2flow import (LenInstance, LpInstance, NonnegVector, SparseIntMatrix, check,
                     reduce_all)
from lp2flow.mapback import map_back
from lp2flow.reduce import STAGES, len_to_2len, lp_to_len
from lp2flow.verify import class_of, flow_value
from lp2flow.witness import WitnessError, construct_witness, witness_all, witness_chain


def test_lp_witness_is_slack_and_surplus():
    lp = LpInstance(SparseIntMatrix.from_dense([[1, 1], [2, -1]]), [3, 2], [1, 2], 2, 5)
    le, tr = lp_to_len(lp)
    x = NonnegVector([1, 1])
    w = construct_witness("lp-len", lp, x, tr)
    assert w.tolist() == [1, 1, 1, 1, 1]
    assert check("lena", le, w, 0)[1].exact


def test_worked_example_carries():
    le = LenInstance(SparseIntMatrix.from_dense([[5, 3, -7]]), [-1], 1)
    out, tr = len_to_2len(le)
    with pytest.raises(WitnessError):
        construct_witness("len-2len", le, NonnegVector([1, 1, 1]), tr)
    w = construct_witness("len-2len", le, NonnegVector([0, 2, 1]), tr)
    # bit 0: x1+x2-x3 = 1 = -1 + 2(c0-d0) -> c0 - d0 = 1
    # bit 1: x2-x3+(c0-d0) = 2 = 2(c1-d1) -> c1 - d1 = 1
    vals = w.tolist()
    c, d = vals[3:5], vals[5:7]
    assert c == [1, 1] and d == [0, 0]
    assert check("klena", out, w, 0)[1].exact


def test_infeasible_lp_point_rejected():
    lp = LpInstance(SparseIntMatrix.from_dense([[1]]), [1], [1], 0, 3)
    insts, traces = reduce_all(lp)
    with pytest.raises(WitnessError):
        witness_chain(lp, NonnegVector([2]), traces, insts)


def test_every_stage_exact_and_projection_identity():
    rng = random.Random(12)
    for _ in range(15):
        lp, x = feasible_lp(rng)
        insts, traces = reduce_all(lp)
        sols = witness_all(lp, x, traces, insts)
        for k, st in enumerate(STAGES):
            ok, rep = check(class_of(insts[k + 1]), insts[k + 1], sols[k + 1], 0)
            assert ok and rep.exact, (st, rep.summary())
            assert map_back(st, sols[k + 1], traces[k]) == sols[k], st


def test_carry_bound_and_conservation():
    rng = random.Random(13)
    for _ in range(10):
        lp, x = feasible_lp(rng)
        insts, traces = reduce_all(lp)
        sols = witness_all(lp, x, traces, insts)
        tr = traces[1]
        C, n = tr["carries"], tr["n_in"]
        carries = sols[2].values[n:n + 2 * C].tolist()
        assert all(v <= tr["delta"] for v in carries)
        cf, flow = insts[-1], sols[-1]
        g = cf.graph
        for f, (s, t) in ((flow.f1, (cf.s1, cf.t1)), (flow.f2, (cf.s2, cf.t2))):
            bal = g.inflow(f) - g.outflow(f)
            for v in range(g.n):
                if v not in (s, t):
                    assert bal[v] == 0


def test_2cfr_witness_saturates_terminal_gadget():
    rng = random.Random(14)
    lp, x = feasible_lp(rng)
    insts, traces = reduce_all(lp)
    sols = witness_all(lp, x, traces, insts)
    r, flow = insts[8], sols[8]
    Mf = traces[7]["Mf"]
    assert flow_value(r, flow, 1) == (2 * Mf, 2 * Mf)
    assert flow_value(r, flow, 2) == (2 * Mf, 2 * Mf)
    g = r.graph
    m = traces[7]["m_in"]
    # e4..e7 of every gadget run at capacity in their own commodity
    for k in range(m):
        assert flow.f1[7 * k + 3] == g.cap[7 * k + 3]
        assert flow.f2[7 * k + 4] == g.cap[7 * k + 4]
        assert flow.f1[7 * k + 5] == g.cap[7 * k + 5]
        assert flow.f2[7 * k + 6] == g.cap[7 * k + 6]


def test_round_trip_returns_x():
    rng = random.Random(15)
    for _ in range(10):
        lp, x = feasible_lp(rng)
        insts, traces = reduce_all(lp)
        from lp2flow.mapback import map_back_chain
        flow = witness_chain(lp, x, traces, insts)
        assert map_back_chain(flow, traces)[0] == x

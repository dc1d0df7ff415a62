import random

import numpy as np
import pytest

from _gen import random_lp
from lp2flow import (FhfInstance, FlowGraph, FphfInstance, KLenInstance, LenInstance,
                     LpInstance, SffInstance, SparseIntMatrix, TwoCffInstance,
                     TwoCfrInstance, compute_X, reduce_all, validate)
from lp2flow.reduce import (TriviallyInfeasible, binary_representation, fhf_to_fphf,
                            fphf_to_sff, len_to_2len, lp_to_len, onelen_to_fhf,
                            sff_to_2cff, twocff_to_2cfr, twocfr_to_2cf, twolen_to_onelen)


@pytest.mark.parametrize("z, want", [(-5, (-1, [2, 0])), (0, (0, [])), (7, (1, [2, 1, 0])),
                                     (1, (1, [0])), (-64, (-1, [6]))])
def test_binary_representation(z, want):
    assert binary_representation(z) == want
    s, bits = binary_representation(z)
    assert s * sum(2 ** l for l in bits) == z


def test_lp_to_len_sizes():
    A = SparseIntMatrix(3, 2, [(0, 0, 1), (1, 1, 2), (2, 0, -1), (2, 1, 3)])
    lp = LpInstance(A, [1, 2, 3], [1, 0], 0, 2)
    le, _ = lp_to_len(lp)
    assert (le.n, le.m) == (6, 4)
    assert le.A.nnz <= 4 * A.nnz
    assert compute_X(le.A, le.b) == compute_X(lp.A, lp.b, lp.c, lp.K)


def test_lp_to_len_tiny():
    lp = LpInstance(SparseIntMatrix.from_dense([[1]]), [0], [0], 0, 1)
    le, _ = lp_to_len(lp)
    assert le.A.dense() == [[0, 0, -1], [1, 1, 0]]
    assert le.b.tolist() == [0, 0]
    assert le.R == 5


def test_len_to_2len_unit_coefficients_have_no_carries():
    le = LenInstance(SparseIntMatrix.from_dense([[1, -1, 0], [0, 1, 1]]), [1, -1], 3)
    out, tr = len_to_2len(le)
    assert tr["carries"] == 0
    assert out.A.dense() == [[1, -1, 0], [0, 1, 1]]
    assert out.b.tolist() == [1, -1]


def test_len_to_2len_worked_example_layout():
    le = LenInstance(SparseIntMatrix.from_dense([[5, 3, -7]]), [-1], 1)
    out, tr = len_to_2len(le)
    assert out.k == 2 and out.A.absmax() <= 2
    # three bit rows and four carry bounds c + sc = d + sd = 2 X R
    assert out.m == 7 and out.n == 3 + 4 * 2
    assert tr["delta"] == 2 * 7 * 1
    assert out.b.tolist()[3:] == [14] * 4


def test_twolen_without_twos_is_copied():
    k = KLenInstance(SparseIntMatrix.from_dense([[1, -1]]), [0], 5, 2)
    out, tr = twolen_to_onelen(k)
    assert out.A == k.A and out.R == 10 and out.k == 1
    assert len(tr["split"]) == 0


def test_twolen_forced_rewrite():
    k = KLenInstance(SparseIntMatrix.from_dense([[2]]), [2], 1, 2)
    out, _ = twolen_to_onelen(k)
    assert out.A.dense() == [[1, 1], [1, -1]]
    assert out.b.tolist() == [2, 0]


def test_onelen_to_fhf_vertex_count():
    k = KLenInstance(SparseIntMatrix.from_dense([[1, 1, 0], [0, 1, -1]]), [1, 0], 4, 1)
    h, _ = onelen_to_fhf(k)
    assert h.graph.n == 6
    assert validate(h) == []


def test_onelen_to_fhf_zero_rhs_equation():
    k = KLenInstance(SparseIntMatrix.from_dense([[1, -1]]), [0], 3, 1)
    h, tr = onelen_to_fhf(k)
    g = h.graph
    assert len(h.fixed) == 0
    edges = g.edges()
    # x1 on s -> J+, x2 on s -> J-, then the pair e+ (J+ -> t), e- (J- -> t)
    assert [(t, hd) for _, t, hd, _ in edges] == [(0, 2), (0, 3), (2, 1), (3, 1)]
    assert all(c == 3 for *_, c in edges)
    assert [sorted(p.tolist()) for p in h.homologous] == [[2, 3]]


def test_onelen_to_fhf_negative_rhs_is_flipped():
    k = KLenInstance(SparseIntMatrix.from_dense([[1, -1]]), [-1], 3, 1)
    h, tr = onelen_to_fhf(k)
    assert tr["flip"].tolist() == [1]
    assert len(h.fixed) == 1 and h.graph.cap[h.fixed[0]] == 1


def test_trivially_infeasible_row():
    k = KLenInstance(SparseIntMatrix(2, 1, [(0, 0, 1)]), [1, 1], 3, 1)
    with pytest.raises(TriviallyInfeasible):
        onelen_to_fhf(k)
    # a zero row with zero rhs is simply dropped
    k0 = KLenInstance(SparseIntMatrix(2, 1, [(0, 0, 1)]), [1, 0], 3, 1)
    h, _ = onelen_to_fhf(k0)
    assert h.graph.n == 4


def _fhf(sets):
    g = FlowGraph.from_edges(3, [(0, 2, 5), (2, 1, 5), (0, 1, 5), (0, 1, 5)])
    return FhfInstance(g, [], sets, 0, 1)


def test_fhf_pair_is_unchanged():
    p, _ = fhf_to_fphf(_fhf([[2, 3]]))
    assert p.graph == _fhf([[2, 3]]).graph
    assert p.pairs.tolist() == [[2, 3]]


def test_fhf_triple_splits_middle_edge():
    h = _fhf([[0, 2, 3]])
    p, _ = fhf_to_fphf(h)
    assert len(p.pairs) == 2
    assert p.graph.n == h.graph.n + 1
    assert p.graph.m == h.graph.m + 1
    assert len(p.fixed) == len(h.fixed)


def test_fphf_single_pair_gadget():
    g = FlowGraph.from_edges(4, [(0, 2, 3), (3, 1, 3)])
    p = FphfInstance(g, [], [[0, 1]], 0, 1)
    s, _ = fphf_to_sff(p)
    assert s.graph.m == 9
    assert len(s.fixed) == 2 and len(s.S1) == 4 and len(s.S2) == 3
    assert validate(s) == []


def test_fphf_without_pairs():
    g = FlowGraph.from_edges(3, [(0, 2, 3), (2, 1, 3)])
    p = FphfInstance(g, [1], [], 0, 1)
    s, _ = fphf_to_sff(p)
    assert s.graph.m == 2 and s.graph.n == 5
    assert sorted(s.S1.tolist()) == [0, 1] and len(s.S2) == 0
    for v in (s.s2, s.t2):
        assert v not in s.graph.tail.tolist() + s.graph.head.tolist()


def _sff(fixed):
    g = FlowGraph.from_edges(6, [(0, 1, 2), (2, 3, 2), (0, 3, 2), (1, 2, 4)])
    return SffInstance(g, fixed, [0, 2], [1], 0, 3, 4, 5)


def test_sff_gadget_counts():
    s = _sff([])
    f, _ = sff_to_2cff(s)
    assert f.graph.m == s.graph.m + 12
    assert f.graph.n == s.graph.n + 6


def test_sff_fixed_selective_edge_drops_e2():
    s = _sff([0])
    f, tr = sff_to_2cff(s)
    assert f.graph.m == s.graph.m + 11
    gad = tr["gadget"].reshape(-1, 5)
    row = gad[tr["selective"].tolist().index(0)]
    assert row[1] == -1
    present = [e for e in row.tolist() if e >= 0]
    assert len(present) == 4 and set(present) <= set(f.fixed.tolist())


def test_sff_copies_plain_edges():
    s = _sff([])
    f, tr = sff_to_2cff(s)
    e = tr["first"][3]
    assert (f.graph.tail[e], f.graph.head[e], f.graph.cap[e]) == (1, 2, 4)


def _cff(m, fixed=()):
    g = FlowGraph.from_edges(4, [(0, 1, 3)] * m)
    return TwoCffInstance(g, list(fixed), 0, 1, 2, 3)


def test_twocff_sizes():
    r, _ = twocff_to_2cfr(_cff(5))
    assert r.graph.m == 45


def test_twocff_single_edge():
    r, tr = twocff_to_2cfr(_cff(1))
    assert tr["Mf"] == 3
    assert r.graph.cap[1] == 6
    assert (r.R1, r.R2) == (6, 6)
    rf, _ = twocff_to_2cfr(_cff(1, [0]))
    assert rf.graph.cap[1] == 3


def test_twocfr_to_2cf():
    r, _ = twocff_to_2cfr(_cff(5))
    cf, tr = twocfr_to_2cf(r)
    assert cf.graph.m == 47 and cf.graph.n == r.graph.n + 2
    assert cf.R == r.R1 + r.R2
    new = tr["new_edges"].tolist()
    assert [cf.graph.cap[e] for e in new] == [r.R1, r.R2]


def test_twocfr_to_2cf_requirement_dominates():
    g = FlowGraph.from_edges(4, [(0, 1, 1), (2, 3, 1)])
    cf, _ = twocfr_to_2cf(TwoCfrInstance(g, 0, 1, 2, 3, 6, 6))
    assert cf.graph.max_capacity() == 6


def test_chain_is_valid_and_deterministic():
    rng = random.Random(3)
    for _ in range(20):
        lp = random_lp(rng)
        a, ta = reduce_all(lp)
        b, tb = reduce_all(lp)
        assert a == b and ta == tb
        for inst in a:
            assert validate(inst) == []


def test_zero_entries_make_no_edges():
    dense = [[1, 0, 2], [0, 3, 0]]
    explicit = SparseIntMatrix(2, 3, [(i, j, v) for i, r in enumerate(dense)
                                      for j, v in enumerate(r)])
    a = LpInstance(explicit, [1, 1], [1, 1, 1], 0, 2)
    b = LpInstance(SparseIntMatrix.from_dense(dense), [1, 1], [1, 1, 1], 0, 2)
    assert reduce_all(a)[0][-1] == reduce_all(b)[0][-1]


def test_trace_ids_exist():
    rng = random.Random(4)
    lp = random_lp(rng)
    inst, traces = reduce_all(lp)
    tr = {t.stage: t for t in traces}
    assert tr["sff-2cff"]["first"].max() < inst[7].graph.m
    assert tr["fphf-sff"]["gadget"].max() < inst[6].graph.m
    assert tr["1len-fhf"]["var_edges"].max() < inst[4].graph.m
    assert tr["2cfr-2cf"]["new_edges"].max() < inst[9].graph.m

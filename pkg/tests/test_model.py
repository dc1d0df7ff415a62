from fractions import Fraction

import numpy as np
import pytest

from lp2flow import (FhfInstance, FlowGraph, KLenInstance, LpInstance, NonnegVector,
                     SparseIntMatrix, TwoCfInstance, TwoCommodityFlow, compute_X, validate)
from lp2flow.model import round_lp_to_integers


def test_compute_x_examples():
    A = SparseIntMatrix.from_dense([[5, 3, -7]])
    assert compute_X(A, [-1]) == 7
    assert compute_X(SparseIntMatrix(2, 2, []), [0, 0], 0) == 0


def test_sparse_matrix_drops_zeros_and_rejects_duplicates():
    A = SparseIntMatrix(2, 3, [(0, 0, 1), (1, 2, 0), (1, 1, -4)])
    assert A.nnz == 2
    assert A.dense() == [[1, 0, 0], [0, -4, 0]]
    with pytest.raises(ValueError, match="duplicate"):
        SparseIntMatrix(1, 1, [(0, 0, 1), (0, 0, 2)])
    with pytest.raises(TypeError):
        SparseIntMatrix(1, 1, [(0, 0, Fraction(1, 2))])


def test_entry_order_does_not_matter():
    a = SparseIntMatrix(2, 2, [(1, 1, 3), (0, 1, 2), (0, 0, 1)])
    b = SparseIntMatrix(2, 2, [(0, 0, 1), (0, 1, 2), (1, 1, 3)])
    assert a == b


def test_klen_coefficient_bound_violation():
    inst = KLenInstance(SparseIntMatrix.from_dense([[3, 1]]), [1], 1, 2)
    assert any("coefficient bound" in v for v in validate(inst))


def test_fixed_homologous_overlap():
    g = FlowGraph.from_edges(2, [(0, 1, 1), (0, 1, 1)])
    inst = FhfInstance(g, [0], [[0, 1]], 0, 1)
    assert any("fixed/homologous overlap" in v for v in validate(inst))


def test_parallel_edges_allowed():
    g = FlowGraph.from_edges(4, [(0, 2, 3), (2, 1, 3), (2, 1, 5), (3, 1, 1)])
    cf = TwoCfInstance(g, 0, 1, 2, 3, 2)
    assert validate(cf) == []


def test_lp_validation():
    ok = LpInstance(SparseIntMatrix.from_dense([[1, 2], [0, 1]]), [1, 1], [0, 1], 0, 1)
    assert validate(ok) == []
    thin = LpInstance(SparseIntMatrix.from_dense([[1, 0], [0, 0]]), [1, 1], [0, 1], 0, 1)
    assert any("sparsity" in v for v in validate(thin))
    zero_r = LpInstance(SparseIntMatrix.from_dense([[1]]), [1], [1], 0, 0)
    assert any("radius" in v for v in validate(zero_r))


def test_negative_entries_rejected():
    with pytest.raises(ValueError):
        NonnegVector([1, -1])
    with pytest.raises(ValueError):
        TwoCommodityFlow([0, 1], [Fraction(-1, 3), 0])


def test_rationals_are_reduced():
    v = NonnegVector([Fraction(4, 2), Fraction(1, 3)])
    assert v.values[0] == 2 and type(v.values[0]) is int
    assert v.values[1] == Fraction(1, 3)


def test_flow_graph_balances():
    g = FlowGraph.from_edges(3, [(0, 1, 2), (1, 2, 2), (0, 2, 1)])
    f = np.array([1, 1, Fraction(1, 2)], dtype=object)
    assert g.outflow(f).tolist() == [Fraction(3, 2), 1, 0]
    assert g.inflow(f).tolist() == [0, 1, Fraction(3, 2)]


def test_round_lp_integral_is_identity():
    lp, D = round_lp_to_integers([[1, 2]], [3], [1, 1], 2, 10, 1)
    assert D == 1 and lp.A.dense() == [[1, 2]]


def test_round_lp_grid():
    # delta = min(eps/(3R), U/(kappa R)) = min(1, 1/10); D = 10
    lp, D = round_lp_to_integers([[Fraction(1, 3)]], [1], [1], 1, 10, 3)
    assert D == 10
    assert lp.A.dense() == [[3]]  # floor(10/3)
    assert lp.b.tolist() == [10] and lp.c.tolist() == [10]


def test_round_lp_rejects_bad_parameters():
    with pytest.raises(ValueError):
        round_lp_to_integers([[Fraction(1, 2)]], [1], [1], 1, 0, 1)
    with pytest.raises(ValueError):
        round_lp_to_integers([[Fraction(1, 2)]], [1], [1], 1, 1, 0)


def test_round_lp_moves_b_up():
    b = [Fraction(1, 7), Fraction(-5, 3)]
    lp, D = round_lp_to_integers([[Fraction(1, 2)], [1]], b, [1], 1, 4, Fraction(1, 2))
    for orig, new in zip(b, lp.b.tolist()):
        assert Fraction(new, D) >= orig

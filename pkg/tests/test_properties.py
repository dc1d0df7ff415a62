import random
from fractions import Fraction

from hypothesis import given, strategies as st

from _gen import feasible_lp, random_lp
from lp2flow import NonnegVector, SparseIntMatrix, TwoCommodityFlow, check, compile, compute_X
from lp2flow.io import parse, serialize
from lp2flow.mapback import map_back_chain
from lp2flow.model import as_flow
from lp2flow.pipeline import budget_floor
from lp2flow.reduce import reduce_all
from lp2flow.verify import flow_value, lp_encoded_adjust
from lp2flow.witness import witness_all

seeds = st.integers(0, 2 ** 32 - 1)
small_rats = st.fractions(min_value=-50, max_value=50, max_denominator=30)


@given(seeds)
def test_io_round_trip(seed):
    lp = random_lp(random.Random(seed))
    text = serialize(lp)
    assert parse(text) == lp and serialize(parse(text)) == text


@given(st.lists(st.fractions(min_value=0, max_value=100, max_denominator=50), max_size=12))
def test_vector_round_trip(vals):
    v = NonnegVector(vals)
    assert parse(serialize(v)) == v


@given(st.lists(st.tuples(st.integers(0, 4), st.integers(0, 4), st.integers(-99, 99)),
                max_size=15), st.randoms())
def test_compute_x_permutation_invariant(entries, r):
    entries = list({(i, j): v for i, j, v in entries if v}.items())
    trip = [(i, j, v) for (i, j), v in entries]
    shuffled = trip[:]
    r.shuffle(shuffled)
    A, B = SparseIntMatrix(5, 5, trip), SparseIntMatrix(5, 5, shuffled)
    assert A == B and compute_X(A) == compute_X(B)
    assert compute_X(A) == max([abs(v) for _, _, v in trip], default=0)


@given(st.lists(small_rats, min_size=1, max_size=8), small_rats)
def test_compute_x_monotone(vals, extra):
    assert compute_X(vals + [extra]) >= compute_X(vals)
    assert compute_X(vals) == max(abs(v) for v in vals)


@given(seeds)
def test_witness_is_exact_at_every_level(seed):
    lp, x = feasible_lp(random.Random(seed), 3, 3, -5, 5, 6)
    instances, traces = reduce_all(lp)
    sols = witness_all(lp, x, traces, instances)
    from lp2flow.verify import class_of
    for inst, sol in zip(instances, sols):
        ok, rep = check(class_of(inst), inst, sol, 0)
        assert ok and rep.exact, rep.summary()
    assert map_back_chain(sols[-1], traces)[0] == x


@given(seeds, st.fractions(min_value=0, max_value=5, max_denominator=20),
       st.fractions(min_value=0, max_value=5, max_denominator=20))
def test_verify_monotone_in_eps(seed, e1, e2):
    rng = random.Random(seed)
    lp = random_lp(rng, 4, 4, -5, 5, 10)
    x = NonnegVector([Fraction(rng.randint(0, 8), rng.randint(1, 4)) for _ in range(lp.n)])
    lo, hi = sorted((e1, e2))
    ok_lo, rep = check("lpa", lp, x, lo)
    ok_hi, _ = check("lpa", lp, x, hi)
    assert ok_hi or not ok_lo
    # the check passes exactly when eps covers the largest error
    assert check("lpa", lp, x, max(rep.tau.values(), default=0))[0]


@given(seeds, st.integers(1, 10 ** 6))
def test_budget_floor(seed, den):
    lp = random_lp(random.Random(seed))
    comp = compile(lp, Fraction(1, den), audit=False)
    assert budget_floor(lp, comp.budget).ok
    assert 0 < comp.budget["2cf"] <= comp.budget["lp"]


@given(seeds, st.fractions(min_value=0, max_value=1, max_denominator=40))
def test_value_adjustment(seed, delta):
    lp, x = feasible_lp(random.Random(seed), 3, 3, -5, 5, 6)
    instances, traces = reduce_all(lp)
    cf = instances[-1]
    fl = as_flow(witness_all(lp, x, traces, instances)[-1])
    s = 1 - delta
    short = TwoCommodityFlow([v * s for v in fl.f1.tolist()], [v * s for v in fl.f2.tolist()])
    eps = delta * cf.R
    F1, F2, e2 = lp_encoded_adjust(cf, short, eps)
    assert F1 + F2 == cf.R and e2 == 2 * eps
    assert abs(F1 - flow_value(cf, short, 1)[0]) <= eps
    assert abs(F2 - flow_value(cf, short, 2)[0]) <= eps


@given(seeds)
def test_compile_deterministic(seed):
    lp = random_lp(random.Random(seed))
    a, b = compile(lp, Fraction(1, 9)), compile(lp, Fraction(1, 9))
    assert serialize(a.cf) == serialize(b.cf)
    assert serialize(list(a.traces)) == serialize(list(b.traces))
    assert serialize(a.report) == serialize(b.report)

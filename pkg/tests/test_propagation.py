import random

import pytest
from hypothesis import given, settings, strategies as st

from md4relax.errors import ParameterError
from md4relax.propagation import MuObjective, UnitPropagator, up_closure
from md4relax.relaxation import RHO_1, RHO_2, RHO_DE, RHO_DOBBERTIN, SwitchVector

from oracles import naive_closure


def random_cnf(rng, nvars, nclauses, width=3):
    clauses = []
    for _ in range(nclauses):
        w = rng.randint(1, width) if rng.random() < 0.1 else width
        vs = rng.sample(range(1, nvars + 1), min(w, nvars))
        clauses.append(tuple(v if rng.random() < 0.5 else -v for v in vs))
    return clauses


def random_assumptions(rng, nvars, count):
    vs = rng.sample(range(1, nvars + 1), count)
    return [v if rng.random() < 0.5 else -v for v in vs]


def test_empty_cnf():
    res = up_closure([], [1], num_vars=1)
    assert res.forced == {1} and not res.conflict


def test_chain():
    res = up_closure([(-1, 2), (-2, 3)], [1])
    assert {2, 3} <= res.forced


def test_conflict_flag():
    res = up_closure([(-1, 2), (-1, -2)], [1])
    assert res.conflict


def test_unit_clauses_in_database():
    res = up_closure([(1,), (-1, 2, 3), (-2,)], [])
    assert res.forced == {1, -2, 3}


def test_base_conflict():
    eng = UnitPropagator([(1,), (-1,)], 1)
    assert eng.base_conflict
    assert eng.closure([]).conflict


def test_complementary_assumptions_rejected():
    with pytest.raises(ParameterError):
        up_closure([(1, 2)], [1, -1])
    with pytest.raises(ParameterError):
        up_closure([(1, 2)], [3], num_vars=2)


def test_against_naive_oracle(rng):
    for _ in range(600):
        n = rng.randint(3, 60)
        clauses = random_cnf(rng, n, rng.randint(1, 4 * n))
        assum = random_assumptions(rng, n, rng.randint(0, min(6, n)))
        res = up_closure(clauses, assum, num_vars=n)
        ref, ref_conflict = naive_closure(clauses, assum)
        assert res.conflict == ref_conflict
        if not ref_conflict:
            assert res.forced == ref


def test_engine_reuse_matches_fresh(rng):
    n = 40
    clauses = random_cnf(rng, n, 120)
    eng = UnitPropagator(clauses, n)
    for _ in range(200):
        assum = random_assumptions(rng, n, rng.randint(0, 5))
        a = eng.closure(assum)
        b = UnitPropagator(clauses, n).closure(assum)
        assert a.conflict == b.conflict
        if not a.conflict:
            assert a.forced == b.forced


@settings(max_examples=200, deadline=None)
@given(st.randoms(use_true_random=False))
def test_order_independence(r):
    n = 25
    clauses = random_cnf(r, n, 60)
    assum = random_assumptions(r, n, 3)
    base = up_closure(clauses, assum, num_vars=n)
    shuffled = list(clauses)
    r.shuffle(shuffled)
    shuffled = [tuple(r.sample(c, len(c))) for c in shuffled]
    other = up_closure(shuffled, list(reversed(assum)), num_vars=n)
    assert base.conflict == other.conflict
    if not base.conflict:
        assert base.forced == other.forced


@settings(max_examples=200, deadline=None)
@given(st.randoms(use_true_random=False))
def test_monotone(r):
    n = 25
    clauses = random_cnf(r, n, 50)
    assum = random_assumptions(r, n, 4)
    small = up_closure(clauses, assum[:2], num_vars=n)
    big = up_closure(clauses, assum, num_vars=n)
    if not big.conflict:
        assert small.forced <= big.forced


def test_mu_counts_distinct_vars():
    clauses = [(-5, 1), (-5, -2), (-5, 3)]
    res = up_closure(clauses, [5], num_vars=5, count_vars=[1, 2, 3, 4])
    assert res.mu == 3


# --- the MD4-39 objective -----------------------------------------------------

@pytest.fixture(scope="module")
def mu_zero(pipeline39):
    return pipeline39.objective(bytes(16))


@pytest.mark.parametrize("lam, expected", [
    (RHO_DOBBERTIN, 288), (RHO_DE, 256), (RHO_1, 288), (RHO_2, 288),
])
def test_table_values(mu_zero, lam, expected):
    res = mu_zero.evaluate(lam)
    assert not res.conflict
    assert res.mu == expected


def test_zero_vector_baseline(mu_zero):
    # hash units alone fix no message bit
    assert mu_zero(SwitchVector.zeros(31)) == 0


def test_mu_repeatable(mu_zero, rng):
    for _ in range(5):
        lam = SwitchVector.random(31, rng)
        assert mu_zero.evaluate(lam) == mu_zero.evaluate(lam)


def test_active_constraints_forced(pipeline39, mu_zero):
    for rc in pipeline39.constraints[:6]:
        lam = SwitchVector.zeros(31).flip(rc.index - 1)
        assert set(rc.literals) <= mu_zero.evaluate(lam).forced


def test_mu_is_word_multiple_for_named_vectors(mu_zero):
    for lam in (RHO_DOBBERTIN, RHO_DE, RHO_1, RHO_2):
        assert mu_zero(lam) % 32 == 0


def test_mu_requires_switches(template39):
    tpl, vm = template39
    with pytest.raises(ParameterError):
        MuObjective(tpl, vm, bytes(16))

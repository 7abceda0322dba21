import sys
from pathlib import Path

import pytest

from md4relax.encoder import parse_dimacs
from md4relax.errors import AdapterError, ParameterError
from md4relax.solver import (PySatAdapter, Status, SubprocessAdapter, export_dimacs,
                             make_adapter, model_satisfies, parse_solver_output)

SOLVERS = Path(__file__).parent / "solvers"


def small_suite():
    """(clauses, assumptions, expected status) regression cases."""
    php = []  # pigeonhole 4 -> 3, unsatisfiable
    var = lambda p, h: 3 * p + h + 1
    for p in range(4):
        php.append(tuple(var(p, h) for h in range(3)))
    for h in range(3):
        for p in range(4):
            for q in range(p + 1, 4):
                php.append((-var(p, h), -var(q, h)))
    return [
        ([(1,)], [], Status.SAT),
        ([(1,), (-1,)], [], Status.UNSAT),
        ([(1, 2), (-1, 2), (1, -2)], [], Status.SAT),
        ([(1, 2), (-1, 2)], [-2], Status.UNSAT),
        ([(1, 2, 3), (-1, -2), (-2, -3)], [2], Status.SAT),
        (php, [], Status.UNSAT),
    ]


@pytest.fixture(params=["pysat", "subprocess"])
def adapter(request):
    if request.param == "pysat":
        a = PySatAdapter("minisat22")
    else:
        a = SubprocessAdapter(SOLVERS / "pysat_dimacs.py")
    yield a
    a.close()


def test_single_unit(adapter):
    v = adapter.solve([(1,)], [], 10)
    assert v.status is Status.SAT and v.value(1)


def test_contradiction(adapter):
    assert adapter.solve([(1,), (-1,)], [], 10).status is Status.UNSAT


@pytest.mark.parametrize("case", range(6))
def test_regression_suite(adapter, case):
    clauses, assum, expected = small_suite()[case]
    v = adapter.solve(clauses, assum, 30)
    assert v.status is expected
    if expected is Status.SAT:
        assert model_satisfies(clauses + [(a,) for a in assum], v.model)
        assert len(v.model) == max(abs(l) for c in clauses for l in c)
    else:
        assert v.model is None
    assert v.wall_time >= 0 and v.solver


def test_pysat_assumptions_reuse_loaded_formula():
    a = PySatAdapter()
    clauses = [(1, 2), (-1, 3)]
    assert a.solve(clauses, [1, -3], 5).status is Status.UNSAT
    assert a.solve(clauses, [1], 5).status is Status.SAT
    assert a.solve(clauses, [-1, -2], 5).status is Status.UNSAT


def test_subprocess_timeout_is_unknown():
    v = SubprocessAdapter(SOLVERS / "slow.py").solve([(1,)], [], 0.5)
    assert v.status is Status.UNKNOWN and v.model is None


def test_subprocess_garbage_is_adapter_error():
    with pytest.raises(AdapterError):
        SubprocessAdapter(SOLVERS / "garbage.py").solve([(1,)], [], 5)


def test_missing_binary_is_adapter_error(tmp_path):
    with pytest.raises(AdapterError):
        SubprocessAdapter(tmp_path / "nope").solve([(1,)], [], 5)


def test_bogus_model_rejected():
    with pytest.raises(AdapterError):
        SubprocessAdapter(SOLVERS / "liar.py").solve([(1, 2)], [], 5)


def test_parse_output():
    assert parse_solver_output("s UNSATISFIABLE\n") == (Status.UNSAT, None)
    st, model = parse_solver_output("c hi\ns SATISFIABLE\nv 1 -2 3 0\n")
    assert st is Status.SAT and model == (1, -2, 3)
    st, model = parse_solver_output("s SATISFIABLE\nv 1\nv 3 0\n", num_vars=4)
    assert model == (1, -2, 3, -4)
    assert parse_solver_output("s UNKNOWN\n")[0] is Status.UNKNOWN


@pytest.mark.parametrize("text", ["", "v 1 0\n", "s MAYBE\n", "s SATISFIABLE\n",
                                  "s SATISFIABLE\nv 1 x 0\n"])
def test_parse_output_errors(text):
    with pytest.raises(AdapterError):
        parse_solver_output(text)


def test_export_roundtrip_and_determinism(tmp_path):
    clauses = [(1, -2), (2, 3, -4), (4,)]
    text = export_dimacs(clauses, [-1, 3], tmp_path / "x.cnf")
    assert text == export_dimacs(clauses, [-1, 3])
    parsed, n = parse_dimacs((tmp_path / "x.cnf").read_text())
    assert sorted(parsed) == sorted(clauses + [(-1,), (3,)])
    assert n == 4


def test_time_limit_validated():
    with pytest.raises(ParameterError):
        PySatAdapter().solve([(1,)], [], 0)


def test_make_adapter():
    assert isinstance(make_adapter("pysat"), PySatAdapter)
    with pytest.raises(ParameterError):
        make_adapter("subprocess")
    with pytest.raises(ParameterError):
        make_adapter("carrier-pigeon")
    with pytest.raises(ParameterError):
        PySatAdapter("no-such-solver")

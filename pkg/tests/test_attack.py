import pytest

from md4relax import md4
from md4relax.attack import (UNSAT_NOTE, AttackResult, CampaignReport, attack, run_campaign,
                             sample_hashes, verify_preimage)
from md4relax.encoder import input_units
from md4relax.errors import ParameterError, VerificationError
from md4relax.relaxation import RHO_1, SwitchVector, active_steps
from md4relax.solver import PySatAdapter, SolverAdapter, Status


@pytest.fixture(scope="module")
def rho1_zero_result():
    return attack(bytes(16), RHO_1, 600)


def test_rho1_zero_hash(rho1_zero_result):
    res = rho1_zero_result
    assert res.verdict is Status.SAT and res.verified
    assert md4.md4_k(res.preimage, 39) == bytes(16)
    trace = md4.chaining_trace(res.preimage, 39)
    assert all(trace[s - 1] == 0 for s in active_steps(RHO_1))
    assert res.to_json()["preimage"] == res.preimage.hex()


def test_known_preimage_assumed(pipeline39, rng):
    block = rng.randbytes(64)
    chi = md4.md4_k(block, 39)
    zero = SwitchVector.zeros(31)
    res = attack(chi, zero, 60, extra_assumptions=input_units(pipeline39.varmap, block))
    assert res.verdict is Status.SAT and res.preimage == block


def test_tiny_limit_may_be_unknown(rng):
    chi = md4.md4_k(rng.randbytes(64), 39)
    res = attack(chi, SwitchVector.zeros(31), 0.2)
    assert res.verdict in (Status.UNKNOWN, Status.SAT)


class _Lying(SolverAdapter):
    """Returns a model of the CNF with a corrupted input bit."""

    name = "lying"

    def __init__(self):
        super().__init__()
        self.inner = PySatAdapter()

    def solve(self, cnf, assumptions=(), time_limit=60):
        v = self.inner.solve(cnf, assumptions, time_limit)
        model = list(v.model)
        model[0] = -model[0]
        return type(v)(v.status, tuple(model), v.wall_time, self.name)


def test_verification_failure_is_hard_error():
    with pytest.raises(VerificationError):
        attack(bytes(16), RHO_1, 600, adapter=_Lying())


def test_sat_result_requires_verification():
    with pytest.raises(VerificationError):
        AttackResult(bytes(16), RHO_1, 39, 0, Status.SAT, bytes(64), False)


def test_unsat_wording():
    r = AttackResult(b"\xff" * 16, RHO_1, 39, 0, Status.UNSAT)
    assert r.note == UNSAT_NOTE
    assert "no preimage exists" not in r.note


def test_verify_preimage(rho1_zero_result):
    block = rho1_zero_result.preimage
    assert verify_preimage(block, bytes(16), 39, active_steps(RHO_1))
    assert not verify_preimage(block, b"\x01" + bytes(15), 39)
    assert not verify_preimage(block, bytes(16), 39, [5])


def test_bad_hash_length():
    with pytest.raises(ParameterError):
        attack(bytes(15), RHO_1, 1)


def test_sample_hashes_reproducible():
    a = sample_hashes(10, 3)
    assert a == sample_hashes(10, 3)
    assert a != sample_hashes(10, 4)
    assert len(set(a)) == 10 and all(len(x) == 16 for x in a)


def test_empty_campaign():
    rep = run_campaign(0, RHO_1, seed=1)
    assert rep.size == 0
    assert all(rep.count(s) == 0 for s in Status)
    assert rep.to_json()["counts"] == {"SAT": 0, "UNSAT": 0, "UNKNOWN": 0}
    assert rep.time_stats()["avg"] is None


def test_small_campaign_bookkeeping():
    rep = run_campaign(2, RHO_1, seed=11, time_limit=1.0)
    assert rep.size == 2
    assert sum(rep.count(s) for s in Status) == 2
    assert abs(sum(rep.fraction(s) for s in Status) - 1) < 1e-12
    assert [r.chi for r in rep.results] == sample_hashes(2, 11)
    for r in rep.results:
        if r.verdict is Status.SAT:
            assert md4.md4_k(r.preimage, 39) == r.chi
    table = rep.summary_table("rho1")
    assert "SAT_%" in table and UNSAT_NOTE in table


def test_report_statistics():
    rep = CampaignReport(RHO_1, 39, 0, 10)
    rep.results = [
        AttackResult(bytes(16), RHO_1, 39, 0, Status.UNSAT, wall_time=2.0),
        AttackResult(bytes(16), RHO_1, 39, 0, Status.UNSAT, wall_time=4.0),
        AttackResult(bytes(16), RHO_1, 39, 0, Status.UNKNOWN, wall_time=10.0),
    ]
    assert rep.time_stats(True) == {"avg": 3.0, "max": 4.0, "median": 3.0}
    assert rep.time_stats(False)["max"] == 10.0
    assert rep.to_json()["percent"]["UNSAT"] == pytest.approx(200 / 3)

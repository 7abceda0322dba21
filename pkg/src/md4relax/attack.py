"""
Preimage attacks on MD4-k under a chosen set of relaxation constraints, and
random-hash campaigns over many targets.

Every SAT answer is turned into a 512-bit block and re-hashed with the
reference implementation; a mismatch is a hard error, never a result.
"""

from __future__ import annotations

import functools
import random
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

from . import md4
from .encoder import TemplateCnf, VariableMap, encode_template, substitute_hash
from .errors import ParameterError, VerificationError
from .propagation import MuObjective
from .relaxation import (RelaxationConstraint, SwitchVector, active_steps,
                         build_constraint_family, lambda_to_assumptions)
from .solver import SolverAdapter, Status, host_info, make_adapter

UNSAT_NOTE = "no preimage under these relaxation constraints"


@dataclass(frozen=True, eq=False)
class Pipeline:
    """MD4-k template with the full relaxation family installed."""

    k: int
    K: int
    template: TemplateCnf
    varmap: VariableMap
    constraints: tuple[RelaxationConstraint, ...]

    @property
    def q(self) -> int:
        return len(self.constraints)

    @functools.lru_cache(maxsize=4)
    def cnf_for(self, chi: bytes) -> TemplateCnf:
        return substitute_hash(self.template, self.varmap, chi)

    @functools.lru_cache(maxsize=4)
    def objective(self, chi: bytes) -> MuObjective:
        return MuObjective(self.template, self.varmap, chi)

    def assumptions(self, lam: SwitchVector) -> list[int]:
        return lambda_to_assumptions(lam, self.varmap)

    def decode_block(self, model: Sequence[int]) -> bytes:
        return md4.bits_to_block([1 if model[v - 1] > 0 else 0 for v in self.varmap.input_vars])


@functools.lru_cache(maxsize=8)
def get_pipeline(k: int = 39, K: int = 0) -> Pipeline:
    template, varmap = encode_template(k)
    constraints, _, varmap, template = build_constraint_family(template, varmap, K)
    return Pipeline(k, K, template, varmap, tuple(constraints))


def verify_preimage(block: bytes, chi: bytes, k: int, steps: Sequence[int] = (), K: int = 0) -> bool:
    """md4_k(block) == chi and the chaining value is K at every listed step."""
    if md4.md4_k(block, k) != chi:
        return False
    trace = md4.chaining_trace(block, k)
    return all(trace[s - 1] == K for s in steps)


@dataclass
class AttackResult:
    chi: bytes
    lam: SwitchVector
    k: int
    K: int
    verdict: Status
    preimage: bytes | None = None
    verified: bool = False
    wall_time: float = 0.0
    solver: str = ""
    host: str = field(default_factory=host_info)

    def __post_init__(self):
        if self.verdict is Status.SAT and not (self.verified and self.preimage is not None):
            raise VerificationError("a SAT attack result must carry a verified preimage")

    @property
    def note(self) -> str:
        if self.verdict is Status.UNSAT:
            return UNSAT_NOTE
        if self.verdict is Status.UNKNOWN:
            return "time limit reached"
        return "preimage found and verified"

    def to_json(self) -> dict:
        return {
            "chi": self.chi.hex(),
            "lambda": str(self.lam),
            "active_steps": active_steps(self.lam),
            "k": self.k,
            "K": self.K,
            "verdict": self.verdict.value,
            "note": self.note,
            "preimage": self.preimage.hex() if self.preimage else None,
            "verified": self.verified,
            "wall_time": round(self.wall_time, 3),
            "solver": self.solver,
            "host": self.host,
        }


def attack(chi: bytes, lam: SwitchVector, time_limit: float = 60.0,
           adapter: SolverAdapter | None = None, k: int = 39, K: int = 0,
           extra_assumptions: Sequence[int] = ()) -> AttackResult:
    """Solve C~(lambda) for target `chi` and verify any preimage found."""
    if len(chi) != md4.DIGEST_BYTES:
        raise ParameterError("hash value must be 16 bytes")
    pipe = get_pipeline(k, K)
    adapter = adapter or make_adapter()
    cnf = pipe.cnf_for(chi)
    verdict = adapter.solve(cnf, pipe.assumptions(lam) + list(extra_assumptions), time_limit)
    block = None
    verified = False
    if verdict.status is Status.SAT:
        block = pipe.decode_block(verdict.model)
        verified = verify_preimage(block, chi, k, active_steps(lam), K)
        if not verified:
            raise VerificationError(
                f"solver model decodes to {block.hex()} which does not hash to {chi.hex()} "
                f"under the active constraints; encoder and reference disagree")
    return AttackResult(chi, lam, k, K, verdict.status, block, verified,
                        verdict.wall_time, verdict.solver, verdict.host)


# --- campaigns ---------------------------------------------------------------

def sample_hashes(n: int, seed: int) -> list[bytes]:
    """n hash values drawn uniformly from {0,1}^128."""
    rng = random.Random(seed)
    return [rng.getrandbits(128).to_bytes(16, "little") for _ in range(n)]


@dataclass
class CampaignReport:
    lam: SwitchVector
    k: int
    seed: int
    time_limit: float
    results: list = field(default_factory=list)

    @property
    def size(self) -> int:
        return len(self.results)

    def count(self, status: Status) -> int:
        return sum(1 for r in self.results if r.verdict is status)

    def fraction(self, status: Status) -> float:
        return self.count(status) / self.size if self.size else 0.0

    def _times(self, decided_only: bool) -> list[float]:
        return [r.wall_time for r in self.results
                if not decided_only or r.verdict is not Status.UNKNOWN]

    def time_stats(self, decided_only: bool = True) -> dict:
        ts = self._times(decided_only)
        if not ts:
            return {"avg": None, "max": None, "median": None}
        return {"avg": statistics.fmean(ts), "max": max(ts), "median": statistics.median(ts)}

    def to_json(self) -> dict:
        return {
            "lambda": str(self.lam),
            "k": self.k,
            "seed": self.seed,
            "time_limit": self.time_limit,
            "size": self.size,
            "counts": {s.value: self.count(s) for s in Status},
            "percent": {s.value: 100.0 * self.fraction(s) for s in Status},
            "time_decided": self.time_stats(True),
            "time_all": self.time_stats(False),
            "results": [r.to_json() for r in self.results],
        }

    def summary_table(self, label: str | None = None) -> str:
        label = label or str(self.lam)
        td = self.time_stats(True)
        ta = self.time_stats(False)

        def fmt(x):
            return "-" if x is None else f"{x:.1f}"

        head = ("constraints", "n", "avg_s", "max_s", "avg_all_s", "max_all_s",
                "SAT_%", "UNSAT_%", "UNKNOWN_%")
        row = (label, str(self.size), fmt(td["avg"]), fmt(td["max"]), fmt(ta["avg"]), fmt(ta["max"]),
               f"{100 * self.fraction(Status.SAT):.1f}", f"{100 * self.fraction(Status.UNSAT):.1f}",
               f"{100 * self.fraction(Status.UNKNOWN):.1f}")
        widths = [max(len(a), len(b)) for a, b in zip(head, row)]
        lines = ["  ".join(h.ljust(w) for h, w in zip(head, widths)),
                 "  ".join(c.ljust(w) for c, w in zip(row, widths)),
                 f"UNSAT means {UNSAT_NOTE}."]
        return "\n".join(lines)


def _campaign_worker(args) -> AttackResult:
    chi, lam_text, limit, k, K, backend, solver, solver_path = args
    adapter = _worker_adapter(backend, solver, solver_path)
    return attack(chi, SwitchVector(tuple(int(c) for c in lam_text)), limit, adapter, k, K)


@functools.lru_cache(maxsize=2)
def _worker_adapter(backend, solver, solver_path):
    return make_adapter(backend, solver, solver_path)


def run_campaign(n: int, lam: SwitchVector, seed: int = 0, time_limit: float = 600.0,
                 k: int = 39, K: int = 0, workers: int = 1, backend: str = "pysat",
                 solver: str = "minisat22", solver_path: str | None = None,
                 progress=None) -> CampaignReport:
    """Attack n seeded random hash values; results are kept in sample order."""
    if n < 0:
        raise ParameterError("sample size must be non-negative")
    report = CampaignReport(lam, k, seed, time_limit)
    chis = sample_hashes(n, seed)
    jobs = [(chi, str(lam), time_limit, k, K, backend, solver, solver_path) for chi in chis]
    if workers > 1 and n > 1:
        with ProcessPoolExecutor(workers) as pool:
            for res in pool.map(_campaign_worker, jobs):
                report.results.append(res)
                if progress:
                    progress(res)
    else:
        for job in jobs:
            # a fresh solver per instance keeps verdict times independent
            res = attack(job[0], lam, time_limit, make_adapter(backend, solver, solver_path), k, K)
            report.results.append(res)
            if progress:
                progress(res)
    return report

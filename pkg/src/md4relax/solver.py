"""
One interface over two kinds of CDCL backend:

* ``pysat``: an in-process solver from python-sat (MiniSat 2.2 by default),
  with native assumptions and incremental reuse of the loaded formula;
* ``subprocess``: any DIMACS solver binary called as ``solver cnf_path`` and
  speaking the usual ``s ...`` / ``v ...`` output format. Assumptions are
  appended to an exported copy as unit clauses.

Every SAT answer is checked clause by clause before it is returned.
"""

from __future__ import annotations

import enum
import logging
import os
import platform
import subprocess
import tempfile
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .encoder import TemplateCnf, dimacs_text
from .errors import AdapterError, ParameterError

log = logging.getLogger(__name__)


class Status(str, enum.Enum):
    SAT = "SAT"
    UNSAT = "UNSAT"
    UNKNOWN = "UNKNOWN"


@dataclass(frozen=True)
class SolverVerdict:
    status: Status
    model: tuple[int, ...] | None = None
    wall_time: float = 0.0
    solver: str = ""
    host: str = field(default_factory=lambda: host_info())

    def __post_init__(self):
        if (self.model is not None) != (self.status is Status.SAT):
            raise ParameterError("a model is present exactly when the status is SAT")

    def value(self, var: int) -> bool:
        if self.model is None:
            raise ParameterError("no model")
        lit = self.model[var - 1]
        return lit > 0


def host_info() -> str:
    return f"{platform.node()} {platform.machine()} {platform.processor() or 'cpu'} x{os.cpu_count()}"


def model_satisfies(clauses: Iterable[Sequence[int]], model: Sequence[int]) -> bool:
    true_lits = set(model)
    return all(any(l in true_lits for l in cl) for cl in clauses)


def _clauses_of(cnf) -> tuple[Sequence[Sequence[int]], int]:
    if isinstance(cnf, TemplateCnf):
        return cnf.clauses, cnf.num_vars
    clauses = [tuple(c) for c in cnf]
    return clauses, max((abs(l) for c in clauses for l in c), default=0)


def _total_model(lits: Iterable[int], num_vars: int) -> tuple[int, ...]:
    vals = {abs(l): l > 0 for l in lits if l != 0}
    return tuple(v if vals.get(v, False) else -v for v in range(1, num_vars + 1))


# --- DIMACS exchange ---------------------------------------------------------

def export_dimacs(cnf, assumptions: Sequence[int] = (), path: str | Path | None = None,
                  num_vars: int | None = None) -> str:
    """DIMACS text of `cnf` with assumptions appended as unit clauses.

    Written to `path` when given.
    """
    clauses, n = _clauses_of(cnf)
    n = max([n, num_vars or 0] + [abs(a) for a in assumptions])
    text = dimacs_text(list(clauses) + [(a,) for a in assumptions], n)
    if path is not None:
        Path(path).write_text(text)
    return text


def parse_solver_output(text: str, num_vars: int | None = None) -> tuple[Status, tuple[int, ...] | None]:
    """Status and (for SAT) the assignment from SAT-competition style output."""
    status = None
    lits: list[int] = []
    for line in text.splitlines():
        line = line.strip()
        if line.startswith("s "):
            word = line[2:].strip().upper()
            if word == "SATISFIABLE":
                status = Status.SAT
            elif word == "UNSATISFIABLE":
                status = Status.UNSAT
            elif word in ("UNKNOWN", "INDETERMINATE"):
                status = Status.UNKNOWN
            else:
                raise AdapterError(f"unrecognized status line {line!r}")
        elif line.startswith("v ") or line == "v":
            try:
                lits.extend(int(x) for x in line[1:].split())
            except ValueError:
                raise AdapterError(f"non-integer value line {line!r}") from None
    if status is None:
        raise AdapterError("solver output has no status line")
    if status is not Status.SAT:
        return status, None
    if not lits:
        raise AdapterError("SAT answer without value lines")
    n = num_vars if num_vars is not None else max(abs(l) for l in lits)
    return status, _total_model(lits, n)


# --- backends ----------------------------------------------------------------

class SolverAdapter:
    """Base class; subclasses implement `_solve`. One solve at a time."""

    name = "abstract"

    def __init__(self):
        self._lock = threading.Lock()

    def solve(self, cnf, assumptions: Sequence[int] = (), time_limit: float = 60.0) -> SolverVerdict:
        if time_limit is None or time_limit <= 0:
            raise ParameterError("time limit must be positive")
        clauses, n = _clauses_of(cnf)
        with self._lock:
            t0 = time.perf_counter()
            status, model = self._solve(cnf, clauses, n, list(assumptions), float(time_limit))
            elapsed = time.perf_counter() - t0
        if status is Status.SAT:
            if not model_satisfies(list(clauses) + [(a,) for a in assumptions], model):
                raise AdapterError(f"{self.name} returned a model that violates the formula")
        return SolverVerdict(status, model, elapsed, self.name)

    def _solve(self, cnf, clauses, num_vars, assumptions, time_limit):
        raise NotImplementedError

    def close(self) -> None:
        pass


class PySatAdapter(SolverAdapter):
    """In-process solver; keeps the last formula loaded for assumption queries."""

    def __init__(self, solver: str = "minisat22"):
        super().__init__()
        try:
            import pysat
            from pysat.solvers import Solver, SolverNames
        except ImportError as exc:  # pragma: no cover - dependency is declared
            raise AdapterError("python-sat is not installed") from exc
        if solver not in SolverNames.__dict__:
            raise ParameterError(f"unknown python-sat solver {solver!r}")
        self._solver_cls = Solver
        self.solver_name = solver
        self.name = f"pysat-{pysat.__version__}:{solver}"
        self._loaded = None
        self._loaded_cnf = None

    def _instance(self, cnf, clauses, num_vars):
        if self._loaded is None or self._loaded_cnf is not cnf:
            self.close()
            self._loaded = self._solver_cls(name=self.solver_name, bootstrap_with=clauses)
            self._loaded_cnf = cnf
        return self._loaded

    def _solve(self, cnf, clauses, num_vars, assumptions, time_limit):
        s = self._instance(cnf, clauses, num_vars)
        timer = threading.Timer(time_limit, s.interrupt)
        timer.start()
        try:
            res = s.solve_limited(assumptions=assumptions, expect_interrupt=True)
        except Exception as exc:
            raise AdapterError(f"{self.name} failed: {exc}") from exc
        finally:
            timer.cancel()
            s.clear_interrupt()
        if res is None:
            return Status.UNKNOWN, None
        if res:
            return Status.SAT, _total_model(s.get_model(), num_vars)
        return Status.UNSAT, None

    def close(self) -> None:
        if self._loaded is not None:
            self._loaded.delete()
        self._loaded = None
        self._loaded_cnf = None


class SubprocessAdapter(SolverAdapter):
    """External DIMACS solver invoked as ``[solver_path, cnf_path]``."""

    def __init__(self, solver_path: str | Path, workdir: str | Path | None = None):
        super().__init__()
        self.solver_path = str(solver_path)
        self.workdir = workdir
        self.name = f"subprocess:{Path(self.solver_path).name}"

    def _solve(self, cnf, clauses, num_vars, assumptions, time_limit):
        with tempfile.TemporaryDirectory(dir=self.workdir) as tmp:
            path = Path(tmp) / "instance.cnf"
            export_dimacs(clauses, assumptions, path, num_vars)
            try:
                proc = subprocess.run([self.solver_path, str(path)], capture_output=True,
                                      text=True, timeout=time_limit)
            except subprocess.TimeoutExpired:
                return Status.UNKNOWN, None
            except OSError as exc:
                raise AdapterError(f"cannot run {self.solver_path}: {exc}") from exc
        try:
            return parse_solver_output(proc.stdout, num_vars)
        except AdapterError as exc:
            raise AdapterError(f"{exc} (exit code {proc.returncode}, stderr {proc.stderr[-200:]!r})") from None


def make_adapter(backend: str = "pysat", solver: str = "minisat22",
                 solver_path: str | None = None) -> SolverAdapter:
    if backend == "pysat":
        return PySatAdapter(solver)
    if backend == "subprocess":
        if not solver_path:
            raise ParameterError("subprocess backend needs solver_path")
        return SubprocessAdapter(solver_path)
    raise ParameterError(f"unknown backend {backend!r}")

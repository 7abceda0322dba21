"""
Unit propagation over a fixed clause database and the input-coverage
objective mu(lambda).

The engine keeps its level-0 closure (all unit clauses of the database,
including the 128 hash units) and answers each query by pushing the
assumption literals on top, propagating to fixpoint with two watched
literals, reading the result, and backtracking to level 0. Binary clauses
are kept as implication lists, longer clauses are watched.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .encoder import TemplateCnf, VariableMap, hash_units
from .errors import ParameterError
from .relaxation import SwitchVector, lambda_to_assumptions


@dataclass(frozen=True)
class PropagationResult:
    forced: frozenset
    conflict: bool
    mu: int

    @property
    def usable(self) -> bool:
        return not self.conflict


class UnitPropagator:
    """Incremental unit propagation; one instance per thread."""

    def __init__(self, clauses: Iterable[Sequence[int]], num_vars: int):
        n = num_vars
        self.num_vars = n
        self._off = n
        self._lv = [0] * (2 * n + 1)
        self._imp: list[list[int]] = [[] for _ in range(2 * n + 1)]
        self._watches: list[list[int]] = [[] for _ in range(2 * n + 1)]
        self._long: list[list[int]] = []
        self._trail: list[int] = []
        self._qhead = 0
        units = []
        off = n
        for cl in clauses:
            lits = list(dict.fromkeys(cl))
            if any(abs(l) > n or l == 0 for l in lits):
                raise ParameterError(f"clause {cl!r} mentions a variable outside 1..{n}")
            if any(-l in lits for l in lits):
                continue
            if len(lits) == 0:
                raise ParameterError("empty clause in database")
            if len(lits) == 1:
                units.append(lits[0])
            elif len(lits) == 2:
                a, b = lits
                self._imp[-a + off].append(b)
                self._imp[-b + off].append(a)
            else:
                ci = len(self._long)
                self._long.append(lits)
                self._watches[lits[0] + off].append(ci)
                self._watches[lits[1] + off].append(ci)

        self._base_conflict = False
        for u in units:
            if not self._assign(u):
                self._base_conflict = True
                break
        if not self._base_conflict:
            self._base_conflict = self._propagate()
        self._base_len = len(self._trail)

    @property
    def base_conflict(self) -> bool:
        return self._base_conflict

    def _assign(self, lit: int) -> bool:
        v = self._lv[lit + self._off]
        if v == 1:
            return True
        if v == -1:
            return False
        self._lv[lit + self._off] = 1
        self._lv[-lit + self._off] = -1
        self._trail.append(lit)
        return True

    def _propagate(self) -> bool:
        """Run to fixpoint; True on conflict."""
        lv = self._lv
        off = self._off
        trail = self._trail
        imp = self._imp
        watches = self._watches
        clauses = self._long
        qhead = self._qhead
        while qhead < len(trail):
            p = trail[qhead]
            qhead += 1
            for q in imp[p + off]:
                v = lv[q + off]
                if v == 0:
                    lv[q + off] = 1
                    lv[-q + off] = -1
                    trail.append(q)
                elif v == -1:
                    self._qhead = qhead
                    return True
            fl = -p
            ws = watches[fl + off]
            i = j = 0
            n = len(ws)
            while i < n:
                ci = ws[i]
                i += 1
                c = clauses[ci]
                if c[0] == fl:
                    c[0] = c[1]
                    c[1] = fl
                first = c[0]
                if lv[first + off] == 1:
                    ws[j] = ci
                    j += 1
                    continue
                for kk in range(2, len(c)):
                    lit = c[kk]
                    if lv[lit + off] != -1:
                        c[1] = lit
                        c[kk] = fl
                        watches[lit + off].append(ci)
                        break
                else:
                    ws[j] = ci
                    j += 1
                    if lv[first + off] == -1:
                        while i < n:
                            ws[j] = ws[i]
                            j += 1
                            i += 1
                        del ws[j:]
                        self._qhead = qhead
                        return True
                    lv[first + off] = 1
                    lv[-first + off] = -1
                    trail.append(first)
            del ws[j:]
        self._qhead = qhead
        return False

    def _backtrack(self) -> None:
        lv = self._lv
        off = self._off
        trail = self._trail
        while len(trail) > self._base_len:
            lit = trail.pop()
            lv[lit + off] = 0
            lv[-lit + off] = 0
        self._qhead = self._base_len

    def closure(self, assumptions: Sequence[int] = (),
                count_vars: Sequence[int] = ()) -> PropagationResult:
        """UP fixpoint of the database plus `assumptions`.

        `mu` counts how many of `count_vars` are assigned at the fixpoint.
        """
        seen = set()
        for a in assumptions:
            if a == 0 or abs(a) > self.num_vars:
                raise ParameterError(f"assumption {a} outside 1..{self.num_vars}")
            if -a in seen:
                raise ParameterError(f"complementary assumptions on variable {abs(a)}")
            seen.add(a)
        conflict = self._base_conflict
        if not conflict:
            for a in assumptions:
                if not self._assign(a):
                    conflict = True
                    break
            if not conflict:
                conflict = self._propagate()
        lv = self._lv
        off = self._off
        mu = sum(1 for v in count_vars if lv[v + off] != 0)
        forced = frozenset(self._trail)
        self._backtrack()
        return PropagationResult(forced, conflict, mu)

    def value(self, assumptions: Sequence[int], var: int) -> int:
        """Value (+1, -1, 0) of `var` at the closure, handy for decoding."""
        res = self.closure(assumptions)
        if var in res.forced:
            return 1
        if -var in res.forced:
            return -1
        return 0


def up_closure(cnf: TemplateCnf | Sequence[Sequence[int]], assumptions: Sequence[int] = (),
               num_vars: int | None = None, count_vars: Sequence[int] = ()) -> PropagationResult:
    """One-shot UP closure of a clause set under `assumptions`."""
    if isinstance(cnf, TemplateCnf):
        clauses, n = cnf.clauses, cnf.num_vars
    else:
        clauses = cnf
        n = num_vars if num_vars is not None else max(
            [abs(l) for c in clauses for l in c] + [abs(a) for a in assumptions] + [0])
    return UnitPropagator(clauses, n).closure(assumptions, count_vars)


class MuObjective:
    """mu(lambda) for a template carrying gated relaxation clauses and a fixed hash."""

    def __init__(self, template: TemplateCnf, varmap: VariableMap, chi: bytes):
        if not varmap.switch_vars:
            raise ParameterError("template has no switching variables installed")
        self.varmap = varmap
        self.chi = chi
        self.engine = UnitPropagator(template.clauses + tuple(hash_units(varmap, chi)),
                                     template.num_vars)

    def evaluate(self, lam: SwitchVector) -> PropagationResult:
        return self.engine.closure(lambda_to_assumptions(lam, self.varmap),
                                   self.varmap.input_vars)

    def __call__(self, lam: SwitchVector) -> int:
        return self.evaluate(lam).mu


def mu(template: TemplateCnf, varmap: VariableMap, chi: bytes, lam: SwitchVector) -> PropagationResult:
    return MuObjective(template, varmap, chi).evaluate(lam)

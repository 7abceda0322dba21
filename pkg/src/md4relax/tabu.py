"""
Tabu search over {0,1}^Q with radius-1 Hamming neighbourhoods.

Bookkeeping follows the two-list scheme: L2 holds every evaluated point
whose neighbourhood still has unvisited members (with a count of them), L1
holds points whose whole neighbourhood has been visited. A point is never
evaluated twice. When a neighbourhood sweep brings no improvement, the next
centre is the L2 point whose value is closest to the best one found.
"""

from __future__ import annotations

import json
import logging
import random
import time
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Sequence

from .errors import ParameterError, ParseError
from .relaxation import SwitchVector, lambda_to_assumptions, parse_lambda
from .solver import SolverAdapter, Status

log = logging.getLogger(__name__)

USABLE = "usable"
SCREENED = "screened_out"

DEFAULT_WINDOW = (256, 320)


@dataclass(frozen=True)
class PointEval:
    status: str
    mu: int | None = None
    reason: str = ""

    @property
    def usable(self) -> bool:
        return self.status == USABLE


@dataclass(frozen=True)
class Record:
    lam: SwitchVector
    mu: int
    t: float

    def to_json(self) -> dict:
        return {"lambda": str(self.lam), "mu": self.mu, "t": round(self.t, 6)}


@dataclass
class SearchConfig:
    start_point: SwitchVector | str = "random"
    screen_time_limit: float | None = 5.0
    total_time_limit: float | None = None
    seed: int = 0
    window: tuple[int, int] = DEFAULT_WINDOW
    max_evaluations: int | None = None
    workers: int = 1

    def __post_init__(self):
        lo, hi = self.window
        if lo > hi:
            raise ParameterError("shortlist window needs lo <= hi")
        for name in ("screen_time_limit", "total_time_limit"):
            v = getattr(self, name)
            if v is not None and v <= 0:
                raise ParameterError(f"{name} must be positive")
        if self.workers < 1:
            raise ParameterError("workers must be >= 1")


@dataclass
class SearchState:
    center: SwitchVector
    best: SwitchVector
    mu_best: int | None
    L1: set = field(default_factory=set)
    L2: dict = field(default_factory=dict)        # point -> unchecked neighbour count
    evaluated: dict = field(default_factory=dict)  # point -> PointEval, insertion ordered
    records: list = field(default_factory=list)


@dataclass
class SearchResult:
    best: SwitchVector
    mu_best: int | None
    records: list
    state: SearchState
    elapsed: float
    stop_reason: str

    @property
    def evaluations(self) -> int:
        return len(self.state.evaluated)


def neighborhood(lam: SwitchVector) -> list[SwitchVector]:
    """All points at Hamming distance 1, ordered by flipped position."""
    return [lam.flip(p) for p in range(len(lam))]


def _mark(state: SearchState, lam: SwitchVector) -> None:
    q = len(lam)
    unchecked = 0
    for p in range(q):
        nb = lam.flip(p)
        if nb in state.L2:
            state.L2[nb] -= 1
            if state.L2[nb] == 0:
                del state.L2[nb]
                state.L1.add(nb)
        elif nb not in state.evaluated:
            unchecked += 1
    if unchecked:
        state.L2[lam] = unchecked
    else:
        state.L1.add(lam)


def get_new_center(state: SearchState) -> SwitchVector | None:
    """Usable L2 point with value closest to mu_best; newest wins ties."""
    best = None
    best_key = None
    for order, lam in enumerate(state.L2):
        ev = state.evaluated[lam]
        if not ev.usable:
            continue
        key = (abs((state.mu_best or 0) - ev.mu), -order)
        if best_key is None or key < best_key:
            best, best_key = lam, key
    return best


def run_search(evaluate: Callable[[SwitchVector], PointEval], q: int, config: SearchConfig,
               log_file: Path | str | None = None,
               cache: dict | None = None,
               on_event: Callable[[dict], None] | None = None) -> SearchResult:
    """Maximise the objective behind `evaluate` over {0,1}^q.

    `cache` maps points to earlier PointEvals (from a previous log) so a run
    can be replayed and continued without re-scoring. Each evaluation is
    appended to `log_file` as one JSON object per line.
    """
    rng = random.Random(config.seed)
    if isinstance(config.start_point, SwitchVector):
        start = config.start_point
    elif config.start_point == "random":
        start = SwitchVector.random(q, rng)
    else:
        start = parse_lambda(str(config.start_point), q)
    if len(start) != q:
        raise ParameterError(f"start point has {len(start)} entries, expected {q}")

    cache = dict(cache or {})
    fh = open(log_file, "a", encoding="utf-8") if log_file is not None else None
    t0 = time.monotonic()
    pool = ThreadPoolExecutor(config.workers) if config.workers > 1 else None

    def score(points: Sequence[SwitchVector]) -> list[PointEval]:
        todo = [p for p in points if p not in cache]
        if pool is not None and len(todo) > 1:
            for p, ev in zip(todo, pool.map(evaluate, todo)):
                cache[p] = ev
        else:
            for p in todo:
                cache[p] = evaluate(p)
        return [cache[p] for p in points]

    def emit(lam: SwitchVector, ev: PointEval, record: bool) -> None:
        event = {"lambda": str(lam), "mu": ev.mu, "status": ev.status, "reason": ev.reason,
                 "record": record, "t": round(time.monotonic() - t0, 6)}
        if fh is not None:
            fh.write(json.dumps(event) + "\n")
            fh.flush()
        if on_event is not None:
            on_event(event)

    def out_of_time() -> bool:
        if config.total_time_limit is not None and time.monotonic() - t0 >= config.total_time_limit:
            return True
        return config.max_evaluations is not None and len(state.evaluated) >= config.max_evaluations

    try:
        ev0 = score([start])[0]
        state = SearchState(center=start, best=start, mu_best=ev0.mu if ev0.usable else None)
        state.evaluated[start] = ev0
        _mark(state, start)
        if ev0.usable:
            state.records.append(Record(start, ev0.mu, time.monotonic() - t0))
        emit(start, ev0, ev0.usable)

        stop_reason = "exhausted"
        while True:
            updated = False
            pending = [nb for nb in neighborhood(state.center) if nb not in state.evaluated]
            if config.max_evaluations is not None:
                pending = pending[:max(0, config.max_evaluations - len(state.evaluated))]
            if pool is not None:
                score(pending)
            for lam in pending:
                if out_of_time():
                    break
                ev = score([lam])[0]
                state.evaluated[lam] = ev
                _mark(state, lam)
                improved = ev.usable and (state.mu_best is None or ev.mu > state.mu_best)
                if improved:
                    state.best, state.mu_best = lam, ev.mu
                    state.records.append(Record(lam, ev.mu, time.monotonic() - t0))
                    updated = True
                    log.info("record mu=%d at %s", ev.mu, lam)
                emit(lam, ev, improved)
            if out_of_time():
                stop_reason = "time" if config.max_evaluations is None or \
                    len(state.evaluated) < config.max_evaluations else "evaluations"
                break
            if updated:
                state.center = state.best
                continue
            nxt = get_new_center(state)
            if nxt is None:
                stop_reason = "exhausted"
                break
            state.center = nxt
    finally:
        if fh is not None:
            fh.close()
        if pool is not None:
            pool.shutdown()

    return SearchResult(state.best, state.mu_best, state.records, state,
                        time.monotonic() - t0, stop_reason)


def shortlist(records: Iterable[Record], window: tuple[int, int] = DEFAULT_WINDOW) -> list[SwitchVector]:
    """Record points whose value lies in the closed window, in discovery order."""
    lo, hi = window
    return [r.lam for r in records if lo <= r.mu <= hi]


def load_log(path: Path | str) -> tuple[dict, list[dict]]:
    """Replay cache and raw events of a search log."""
    cache: dict = {}
    events = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                e = json.loads(line)
                lam = parse_lambda(e["lambda"], None)
            except (ValueError, KeyError) as exc:
                raise ParseError(f"{path}:{lineno}: bad log record ({exc})") from None
            cache[lam] = PointEval(e["status"], e.get("mu"), e.get("reason", ""))
            events.append(e)
    return cache, events


def summarize(result: SearchResult, window: tuple[int, int] = DEFAULT_WINDOW) -> dict:
    evs = result.state.evaluated.values()
    hist = Counter(ev.mu for ev in evs if ev.usable)
    n = max(1, result.evaluations)
    sl = shortlist(result.records, window)
    return {
        "best_lambda": str(result.best),
        "mu_best": result.mu_best,
        "evaluations": result.evaluations,
        "screened_out": sum(1 for ev in evs if not ev.usable),
        "records": [r.to_json() for r in result.records],
        "record_fraction": len(result.records) / n,
        "shortlist": [str(x) for x in sl],
        "shortlist_fraction": len(sl) / n,
        "mu_histogram": {str(k): v for k, v in sorted(hist.items())},
        "elapsed": result.elapsed,
        "stop_reason": result.stop_reason,
    }


# --- the MD4 objective with solver screening --------------------------------

class Md4PointEvaluator:
    """mu(lambda) plus isCorrectPoint screening for one fixed hash value."""

    def __init__(self, objective, cnf, adapter: SolverAdapter | None,
                 screen_time_limit: float | None = 5.0):
        self.objective = objective
        self.cnf = cnf
        self.adapter = adapter
        self.screen_time_limit = screen_time_limit

    def is_correct_point(self, lam: SwitchVector) -> PointEval:
        res = self.objective.evaluate(lam)
        if res.conflict:
            return PointEval(SCREENED, res.mu, "up-conflict")
        if self.adapter is not None and self.screen_time_limit:
            verdict = self.adapter.solve(self.cnf, lambda_to_assumptions(lam, self.objective.varmap),
                                         self.screen_time_limit)
            if verdict.status is Status.UNSAT:
                return PointEval(SCREENED, res.mu, "unsat")
        return PointEval(USABLE, res.mu)

    __call__ = is_correct_point

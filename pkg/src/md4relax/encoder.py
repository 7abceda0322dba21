"""
Template CNF for truncated MD4 built by symbolic execution of the step
function, one gate at a time.

Bits are either a DIMACS literal (non-zero int) or a Python bool for a
known constant. Constants are folded while emitting clauses, so the IV and
round constants never become variables. Modular addition is a ripple-carry
chain of full adders, rotations are pure rewiring.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Sequence, Union

from . import md4
from .errors import ParameterError, ParseError

Bit = Union[int, bool]
Word = list  # 32 Bits, least significant first

MIN_STEPS = 5


@dataclass(frozen=True)
class TemplateCnf:
    clauses: tuple[tuple[int, ...], ...]
    num_vars: int
    k: int

    def __post_init__(self):
        for c in self.clauses:
            if not c:
                raise ParameterError("template contains an empty clause")

    @property
    def num_clauses(self) -> int:
        return len(self.clauses)

    def extend(self, clauses: Iterable[Sequence[int]], num_vars: int | None = None) -> "TemplateCnf":
        added = tuple(tuple(c) for c in clauses)
        return replace(self, clauses=self.clauses + added,
                       num_vars=self.num_vars if num_vars is None else num_vars)


@dataclass(frozen=True)
class VariableMap:
    input_vars: tuple[int, ...]
    output_vars: tuple[int, ...]
    chaining_vars: dict = field(default_factory=dict)  # step -> tuple of 32 ids
    switch_vars: tuple[int, ...] = ()

    def check(self) -> None:
        groups = [self.input_vars, self.output_vars, self.switch_vars,
                  *self.chaining_vars.values()]
        seen: set[int] = set()
        for g in groups:
            for v in g:
                if v in seen:
                    raise ParameterError(f"variable {v} appears in two groups")
                seen.add(v)
        if len(self.input_vars) != 512 or len(self.output_vars) != 128:
            raise ParameterError("variable map needs 512 input and 128 output ids")

    def to_json(self) -> dict:
        return {
            "input_vars": list(self.input_vars),
            "output_vars": list(self.output_vars),
            "chaining_vars": {str(s): list(v) for s, v in sorted(self.chaining_vars.items())},
            "switch_vars": list(self.switch_vars),
        }

    @classmethod
    def from_json(cls, data: dict) -> "VariableMap":
        try:
            return cls(
                input_vars=tuple(data["input_vars"]),
                output_vars=tuple(data["output_vars"]),
                chaining_vars={int(s): tuple(v) for s, v in data["chaining_vars"].items()},
                switch_vars=tuple(data.get("switch_vars", ())),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"malformed variable map: {exc}") from None


# --- gate-level builder ------------------------------------------------------

def _const(b: Bit) -> bool:
    return isinstance(b, bool)


def _neg(b: Bit) -> Bit:
    return (not b) if _const(b) else -b


class _Circuit:
    def __init__(self):
        self.num_vars = 0
        self.clauses: list[tuple[int, ...]] = []

    def new_var(self) -> int:
        self.num_vars += 1
        return self.num_vars

    def emit(self, lits: Sequence[Bit]) -> None:
        out = []
        for lit in lits:
            if _const(lit):
                if lit:
                    return
                continue
            out.append(lit)
        assert out, "constant folding produced an empty clause"
        self.clauses.append(tuple(out))

    def _fold(self, fn, ins: Sequence[Bit]) -> Bit | None:
        """Constant or single-literal value of fn(ins), or None if neither."""
        free = [i for i, b in enumerate(ins) if not _const(b)]
        table = []
        for mask in range(1 << len(free)):
            vals = [bool(b) if _const(b) else False for b in ins]
            for pos, i in enumerate(free):
                vals[i] = bool(mask >> pos & 1)
            table.append(fn(*vals))
        if all(table):
            return True
        if not any(table):
            return False
        for pos, i in enumerate(free):
            bit = [bool(m >> pos & 1) for m in range(1 << len(free))]
            if table == bit:
                return ins[i]
            if table == [not x for x in bit]:
                return -ins[i]
        return None

    def xor3(self, a: Bit, b: Bit, c: Bit, fresh: bool = False) -> Bit:
        if not fresh or (_const(a) and _const(b) and _const(c)):
            v = self._fold(lambda x, y, z: x ^ y ^ z, (a, b, c))
            if v is not None:
                return v
        o = self.new_var()
        for sa in (0, 1):
            for sb in (0, 1):
                for sc in (0, 1):
                    so = sa ^ sb ^ sc ^ 1  # block the assignment with wrong parity
                    self.emit([
                        _neg(a) if sa else a, _neg(b) if sb else b,
                        _neg(c) if sc else c, -o if so else o,
                    ])
        return o

    def maj(self, a: Bit, b: Bit, c: Bit) -> Bit:
        v = self._fold(lambda x, y, z: (x and y) or (x and z) or (y and z), (a, b, c))
        if v is not None:
            return v
        o = self.new_var()
        for x, y in ((a, b), (a, c), (b, c)):
            self.emit([_neg(x), _neg(y), o])
            self.emit([x, y, -o])
        return o

    def choice(self, x: Bit, y: Bit, z: Bit) -> Bit:
        v = self._fold(lambda p, q, r: q if p else r, (x, y, z))
        if v is not None:
            return v
        o = self.new_var()
        self.emit([_neg(x), _neg(y), o])
        self.emit([_neg(x), y, -o])
        self.emit([x, _neg(z), o])
        self.emit([x, z, -o])
        self.emit([_neg(y), _neg(z), o])  # redundant, keeps UP arc-consistent
        self.emit([y, z, -o])
        return o

    def add(self, a: Word, b: Word) -> Word:
        """32-bit modular sum; every non-constant sum bit is a fresh variable."""
        out = []
        carry: Bit = False
        for j in range(32):
            out.append(self.xor3(a[j], b[j], carry, fresh=True))
            if j < 31:
                carry = self.maj(a[j], b[j], carry)
        return out

    def round_fn(self, rnd: int, x: Word, y: Word, z: Word) -> Word:
        if rnd == 0:
            return [self.choice(p, q, r) for p, q, r in zip(x, y, z)]
        if rnd == 1:
            return [self.maj(p, q, r) for p, q, r in zip(x, y, z)]
        return [self.xor3(p, q, r) for p, q, r in zip(x, y, z)]


def _const_word(value: int) -> Word:
    return [bool(value >> j & 1) for j in range(32)]


def _rotl(word: Word, s: int) -> Word:
    return [word[(j - s) % 32] for j in range(32)]


def encode_template(k: int) -> tuple[TemplateCnf, VariableMap]:
    """Encode MD4-k as a CNF whose inputs are variables 1..512.

    Output variables are renumbered to be the last 128 ids.
    """
    if not isinstance(k, int) or not MIN_STEPS <= k <= md4.NUM_STEPS:
        raise ParameterError(f"encoder supports k in [{MIN_STEPS}, {md4.NUM_STEPS}], got {k!r}")
    circ = _Circuit()
    msg = [[circ.new_var() for _ in range(32)] for _ in range(16)]

    a, b, c, d = md4.IV
    q: list[Word] = [_const_word(a), _const_word(d), _const_word(c), _const_word(b)]
    chaining: dict[int, list[int]] = {}
    for i in range(1, k + 1):
        rnd, w, s = md4.SCHEDULE[i - 1]
        f = circ.round_fn(rnd, q[-1], q[-2], q[-3])
        t = circ.add(q[-4], f)
        t = circ.add(t, msg[w])
        if md4.ROUND_CONSTANTS[rnd]:
            t = circ.add(t, _const_word(md4.ROUND_CONSTANTS[rnd]))
        word = _rotl(t, s)
        assert not any(_const(x) for x in word)
        chaining[i] = list(word)
        q.append(word)

    regs: list[Word] = [[], [], [], []]
    for i in range(k - 3, k + 1):
        regs[md4.register_of_step(i)] = q[i + 3]
    outputs = []
    for r in range(4):
        outputs.extend(circ.add(regs[r], _const_word(md4.IV[r])))

    # move outputs to the end of the numbering
    out_set = set(outputs)
    perm = {}
    nxt = 1
    for v in range(1, circ.num_vars + 1):
        if v not in out_set:
            perm[v] = nxt
            nxt += 1
    for v in outputs:
        perm[v] = nxt
        nxt += 1

    def ren(lit: int) -> int:
        return perm[lit] if lit > 0 else -perm[-lit]

    clauses = tuple(tuple(ren(l) for l in cl) for cl in circ.clauses)
    varmap = VariableMap(
        input_vars=tuple(perm[v] for row in msg for v in row),
        output_vars=tuple(perm[v] for v in outputs),
        chaining_vars={i: tuple(perm[v] for v in ws) for i, ws in chaining.items()},
    )
    return TemplateCnf(clauses, circ.num_vars, k), varmap


def hash_units(varmap: VariableMap, chi: bytes) -> list[tuple[int]]:
    bits = md4.digest_to_bits(chi)
    return [(v if bit else -v,) for v, bit in zip(varmap.output_vars, bits)]


def substitute_hash(template: TemplateCnf, varmap: VariableMap, chi: bytes) -> TemplateCnf:
    """C(f, chi): the template plus 128 unit clauses pinning the outputs to chi."""
    return template.extend(hash_units(varmap, chi))


def input_units(varmap: VariableMap, block: bytes) -> list[int]:
    """Literals fixing every input variable to the bits of `block`."""
    return [v if bit else -v for v, bit in zip(varmap.input_vars, md4.block_to_bits(block))]


# --- DIMACS ------------------------------------------------------------------

def dimacs_text(clauses: Iterable[Sequence[int]], num_vars: int,
                comments: Sequence[str] = ()) -> str:
    clauses = list(clauses)
    lines = [f"c {c}" for c in comments]
    lines.append(f"p cnf {num_vars} {len(clauses)}")
    lines.extend(" ".join(map(str, cl)) + " 0" for cl in clauses)
    return "\n".join(lines) + "\n"


def parse_dimacs(text: str) -> tuple[list[tuple[int, ...]], int]:
    """Clauses and declared variable count of a DIMACS CNF document."""
    num_vars = None
    declared = None
    clauses: list[tuple[int, ...]] = []
    current: list[int] = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("c") or line.startswith("%"):
            continue
        if line.startswith("p"):
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise ParseError(f"line {lineno}: bad problem line {line!r}")
            num_vars, declared = int(parts[2]), int(parts[3])
            continue
        if num_vars is None:
            raise ParseError(f"line {lineno}: clause before problem line")
        try:
            lits = [int(x) for x in line.split()]
        except ValueError:
            raise ParseError(f"line {lineno}: non-integer literal") from None
        for lit in lits:
            if lit == 0:
                clauses.append(tuple(current))
                current = []
            elif abs(lit) > num_vars:
                raise ParseError(f"line {lineno}: literal {lit} exceeds {num_vars} variables")
            else:
                current.append(lit)
    if num_vars is None:
        raise ParseError("missing problem line")
    if current:
        raise ParseError("last clause is not zero-terminated")
    if declared != len(clauses):
        raise ParseError(f"header declares {declared} clauses, found {len(clauses)}")
    return clauses, num_vars


def write_template(template: TemplateCnf, varmap: VariableMap, path: str | Path) -> Path:
    """Write `path` (DIMACS) and `path`.map.json (variable map sidecar)."""
    path = Path(path)
    path.write_text(dimacs_text(template.clauses, template.num_vars,
                                comments=[f"md4-{template.k} template"]))
    side = path.with_name(path.name + ".map.json")
    side.write_text(json.dumps({"k": template.k, **varmap.to_json()}, indent=1, sort_keys=True) + "\n")
    return side


def read_template(path: str | Path) -> tuple[TemplateCnf, VariableMap]:
    path = Path(path)
    clauses, num_vars = parse_dimacs(path.read_text())
    meta = json.loads(path.with_name(path.name + ".map.json").read_text())
    return TemplateCnf(tuple(clauses), num_vars, int(meta["k"])), VariableMap.from_json(meta)

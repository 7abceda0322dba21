"""
Relaxation constraints "chaining value at step i equals K", each gated by a
switching variable s_j through binary clauses (-s_j | l).

Constraint j (1-based) targets step j + 4: the first four steps and the last
four steps of MD4-k cannot carry a constraint, so MD4-k has Q = k - 8 of
them. A lambda vector is printed as a 0/1 string whose leftmost character is
constraint 1.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Sequence

from .encoder import TemplateCnf, VariableMap
from .errors import ParameterError, ParseError

STEP_OFFSET = 4
MIN_K = 9


def num_constraints(k: int) -> int:
    return k - 2 * STEP_OFFSET


def constraint_step(j: int) -> int:
    return j + STEP_OFFSET


@dataclass(frozen=True)
class SwitchVector:
    bits: tuple[int, ...]

    def __post_init__(self):
        if any(b not in (0, 1) for b in self.bits):
            raise ParameterError("switch vector entries must be 0 or 1")

    def __str__(self) -> str:
        return "".join("1" if b else "0" for b in self.bits)

    def __len__(self) -> int:
        return len(self.bits)

    @property
    def weight(self) -> int:
        return sum(self.bits)

    def flip(self, pos: int) -> "SwitchVector":
        """Copy with 0-based position `pos` inverted."""
        b = list(self.bits)
        b[pos] ^= 1
        return SwitchVector(tuple(b))

    def complement(self) -> "SwitchVector":
        return SwitchVector(tuple(1 - b for b in self.bits))

    @classmethod
    def zeros(cls, q: int) -> "SwitchVector":
        return cls((0,) * q)

    @classmethod
    def random(cls, q: int, rng: random.Random) -> "SwitchVector":
        return cls(tuple(rng.randint(0, 1) for _ in range(q)))


def parse_lambda(text: str, q: int | None = 31) -> SwitchVector:
    text = text.strip()
    if q is not None and len(text) != q:
        raise ParseError(f"switch vector must have {q} characters, got {len(text)}")
    if not text or set(text) - {"0", "1"}:
        raise ParseError(f"switch vector must be a 0/1 string, got {text!r}")
    return SwitchVector(tuple(int(ch) for ch in text))


def active_steps(lam: SwitchVector) -> list[int]:
    return [constraint_step(p) for p, b in enumerate(lam.bits, 1) if b]


def from_steps(steps: Sequence[int], k: int = 39) -> SwitchVector:
    q = num_constraints(k)
    bits = [0] * q
    for s in steps:
        if not STEP_OFFSET < s <= STEP_OFFSET + q:
            raise ParameterError(f"step {s} cannot carry a constraint for k={k}")
        bits[s - STEP_OFFSET - 1] = 1
    return SwitchVector(tuple(bits))


# Vectors reported for MD4-39 with K = 0.
RHO_1 = parse_lambda("0000000001101110111011101000000")
RHO_2 = parse_lambda("0000000000101110111011101100000")
RHO_DOBBERTIN = parse_lambda("0000000011101110111011100000000")
RHO_DE = parse_lambda("0000000001101110111011100000000")

NAMED_VECTORS = {
    "rho1": RHO_1,
    "rho2": RHO_2,
    "dobbertin": RHO_DOBBERTIN,
    "de": RHO_DE,
}


def lambda_from_text(text: str, q: int = 31) -> SwitchVector:
    """Named vector (rho1, rho2, dobbertin, de) or an explicit 0/1 string."""
    key = text.strip().lower()
    if key in NAMED_VECTORS and q == 31:
        return NAMED_VECTORS[key]
    if key in ("zeros", "none"):
        return SwitchVector.zeros(q)
    return parse_lambda(key, q)


@dataclass(frozen=True)
class RelaxationConstraint:
    index: int
    step: int
    literals: tuple[int, ...]
    switch_var: int

    def gated_clauses(self) -> list[tuple[int, int]]:
        return [(-self.switch_var, lit) for lit in self.literals]


def build_constraint_family(template: TemplateCnf, varmap: VariableMap, K: int = 0):
    """Install Q = k - 8 gated constraints fixing chaining values to K.

    Returns (constraints, gated clauses, extended variable map, extended
    template). Switching variables take the ids following the template's.
    """
    k = template.k
    if k < MIN_K:
        raise ParameterError(f"relaxation constraints need k >= {MIN_K}, got {k}")
    if not 0 <= K <= 0xFFFFFFFF:
        raise ParameterError("K must be a 32-bit constant")
    if varmap.switch_vars:
        raise ParameterError("constraint family already installed")
    q = num_constraints(k)
    constraints = []
    gated: list[tuple[int, int]] = []
    for j in range(1, q + 1):
        step = constraint_step(j)
        bits = varmap.chaining_vars[step]
        lits = tuple(v if (K >> b) & 1 else -v for b, v in enumerate(bits))
        rc = RelaxationConstraint(j, step, lits, template.num_vars + j)
        constraints.append(rc)
        gated.extend(rc.gated_clauses())
    new_map = VariableMap(varmap.input_vars, varmap.output_vars, varmap.chaining_vars,
                          tuple(rc.switch_var for rc in constraints))
    new_template = template.extend(gated, num_vars=template.num_vars + q)
    return constraints, gated, new_map, new_template


def lambda_to_assumptions(lam: SwitchVector, varmap: VariableMap) -> list[int]:
    """Full assignment of the switching variables selected by `lam`."""
    if len(lam) != len(varmap.switch_vars):
        raise ParameterError(f"switch vector has {len(lam)} entries, template has {len(varmap.switch_vars)}")
    return [s if b else -s for s, b in zip(varmap.switch_vars, lam.bits)]

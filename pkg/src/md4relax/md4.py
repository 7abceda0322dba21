"""
Bit-exact MD4 compression truncated to the first k of its 48 steps.

The state is tracked as a sequence of chaining values Q[-3..k]: the four IV
words seed Q[-3..0] in register order A, D, C, B and every step appends one
fresh 32-bit value

    Q[i] = (Q[i-4] + f_i(Q[i-1], Q[i-2], Q[i-3]) + m[w_i] + K_i) <<< s_i

The truncated digest is the last four chaining values, re-sorted into the
A, B, C, D registers, plus the IV (the feedforward addition is kept for
every k).
"""

from __future__ import annotations

import struct
from typing import Sequence

from .errors import ParameterError, ParseError

MASK = 0xFFFFFFFF
NUM_STEPS = 48
BLOCK_BYTES = 64
DIGEST_BYTES = 16

IV = (0x67452301, 0xEFCDAB89, 0x98BADCFE, 0x10325476)  # A, B, C, D

ROUND_CONSTANTS = (0x00000000, 0x5A827999, 0x6ED9EBA1)

_SHIFTS = ((3, 7, 11, 19), (3, 5, 9, 13), (3, 9, 11, 15))
_ROUND3_ORDER = (0, 8, 4, 12, 2, 10, 6, 14, 1, 9, 5, 13, 3, 11, 7, 15)


def _word_index(step: int) -> int:
    n = (step - 1) % 16
    rnd = (step - 1) // 16
    if rnd == 0:
        return n
    if rnd == 1:
        return (n % 4) * 4 + n // 4
    return _ROUND3_ORDER[n]


# Per-step schedule, 1-indexed: (round, message word, rotation).
SCHEDULE = tuple(
    ((i - 1) // 16, _word_index(i), _SHIFTS[(i - 1) // 16][(i - 1) % 4])
    for i in range(1, NUM_STEPS + 1)
)


def rotl(x: int, s: int) -> int:
    return ((x << s) | (x >> (32 - s))) & MASK


def round_f(x: int, y: int, z: int) -> int:
    return (x & y) | (~x & z)


def round_g(x: int, y: int, z: int) -> int:
    return (x & y) | (x & z) | (y & z)


def round_h(x: int, y: int, z: int) -> int:
    return x ^ y ^ z


ROUND_FUNCTIONS = (round_f, round_g, round_h)


def register_of_step(step: int) -> int:
    """Index (0=A, 1=B, 2=C, 3=D) of the register a step writes to."""
    return (0, 3, 2, 1)[(step - 1) % 4]


def _check_k(k: int) -> None:
    if not isinstance(k, int) or not 1 <= k <= NUM_STEPS:
        raise ParameterError(f"step count must lie in [1, {NUM_STEPS}], got {k!r}")


def block_words(block: bytes | Sequence[int]) -> tuple[int, ...]:
    """Sixteen little-endian message words of a 64-byte block.

    A sequence of sixteen ints is accepted and returned unchanged.
    """
    if isinstance(block, (bytes, bytearray)):
        if len(block) != BLOCK_BYTES:
            raise ParameterError(f"message block must be {BLOCK_BYTES} bytes, got {len(block)}")
        return struct.unpack("<16I", bytes(block))
    words = tuple(int(w) for w in block)
    if len(words) != 16 or any(not 0 <= w <= MASK for w in words):
        raise ParameterError("message block must be sixteen 32-bit words")
    return words


def _run(words: tuple[int, ...], k: int, iv: Sequence[int]) -> list[int]:
    a, b, c, d = iv
    q = [a, d, c, b]
    for i in range(1, k + 1):
        rnd, w, s = SCHEDULE[i - 1]
        f = ROUND_FUNCTIONS[rnd](q[-1], q[-2], q[-3])
        q.append(rotl((q[-4] + f + words[w] + ROUND_CONSTANTS[rnd]) & MASK, s))
    return q


def chaining_trace(message: bytes | Sequence[int], k: int) -> list[int]:
    """Chaining values Q[1..k] (element i-1 belongs to step i)."""
    _check_k(k)
    return _run(block_words(message), k, IV)[4:]


def final_registers(message: bytes | Sequence[int], k: int,
                    iv: Sequence[int] = IV) -> tuple[int, int, int, int]:
    """A, B, C, D after k steps, before the feedforward addition."""
    _check_k(k)
    return _registers_from_trace(_run(block_words(message), k, iv))


def _registers_from_trace(q: list[int]) -> tuple[int, int, int, int]:
    # q[j + 3] holds Q[j]; the last value written to register r wins
    regs = [0, 0, 0, 0]
    for j in range(len(q) - 4, len(q)):
        regs[register_of_step(j - 3)] = q[j]
    return regs[0], regs[1], regs[2], regs[3]


def md4_k_words(message: bytes | Sequence[int], k: int,
                iv: Sequence[int] = IV) -> tuple[int, int, int, int]:
    """Truncated digest as four 32-bit words A, B, C, D."""
    regs = final_registers(message, k, iv)
    return tuple((r + v) & MASK for r, v in zip(regs, iv))  # type: ignore[return-value]


def md4_k(message: bytes | Sequence[int], k: int, iv: Sequence[int] = IV) -> bytes:
    """MD4 compression of one 512-bit block truncated to k steps.

    `iv` defaults to the standard initial value; passing another chaining
    state allows chaining several compressions (used only in tests).
    """
    return struct.pack("<4I", *md4_k_words(message, k, iv))


def pad_message(data: bytes) -> bytes:
    """Standard MD4 padding of a message shorter than 56 bytes into one block."""
    if len(data) > 55:
        raise ParameterError("single-block padding needs a message of at most 55 bytes")
    return data + b"\x80" + b"\x00" * (55 - len(data)) + struct.pack("<Q", 8 * len(data))


# --- bit and hex conversions -------------------------------------------------

def words_to_bits(words: Sequence[int]) -> list[int]:
    """Bit j of word i lands at position 32*i + j."""
    return [(w >> j) & 1 for w in words for j in range(32)]


def bits_to_words(bits: Sequence[int]) -> tuple[int, ...]:
    if len(bits) % 32:
        raise ParameterError("bit vector length must be a multiple of 32")
    return tuple(
        sum((1 << j) for j in range(32) if bits[32 * i + j])
        for i in range(len(bits) // 32)
    )


def block_to_bits(block: bytes | Sequence[int]) -> list[int]:
    return words_to_bits(block_words(block))


def bits_to_block(bits: Sequence[int]) -> bytes:
    if len(bits) != 8 * BLOCK_BYTES:
        raise ParameterError("a message block has exactly 512 bits")
    return struct.pack("<16I", *bits_to_words(bits))


def digest_to_bits(digest: bytes) -> list[int]:
    if len(digest) != DIGEST_BYTES:
        raise ParameterError("a digest has exactly 16 bytes")
    return words_to_bits(struct.unpack("<4I", digest))


def bits_to_digest(bits: Sequence[int]) -> bytes:
    if len(bits) != 8 * DIGEST_BYTES:
        raise ParameterError("a digest has exactly 128 bits")
    return struct.pack("<4I", *bits_to_words(bits))


def _from_hex(text: str, nbytes: int, what: str) -> bytes:
    text = text.strip()
    if len(text) != 2 * nbytes:
        raise ParseError(f"{what} must be {2 * nbytes} hex characters, got {len(text)}")
    try:
        return bytes.fromhex(text)
    except ValueError as exc:
        raise ParseError(f"invalid hex in {what}: {exc}") from None


def block_from_hex(text: str) -> bytes:
    return _from_hex(text, BLOCK_BYTES, "message block")


def digest_from_hex(text: str) -> bytes:
    return _from_hex(text, DIGEST_BYTES, "digest")

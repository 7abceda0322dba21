"""Independent reference procedures the package is checked against."""

import itertools
import struct

from Crypto.Hash import MD4


def third_party_md4(message: bytes) -> bytes:
    return MD4.new(message).digest()


def standard_padding(message: bytes) -> bytes:
    """Message plus MD4 padding, a whole number of 64-byte blocks."""
    tail = b"\x80" + b"\x00" * ((55 - len(message)) % 64)
    return message + tail + struct.pack("<Q", 8 * len(message))


def padding_block_for_64_bytes() -> bytes:
    """Second block MD4 appends after a 64-byte message."""
    return b"\x80" + b"\x00" * 55 + struct.pack("<Q", 512)


def naive_closure(clauses, assumptions):
    """Repeated-scan unit propagation: (set of true literals, conflict flag)."""
    true = set(assumptions)
    if any(-l in true for l in true):
        return true, True
    changed = True
    while changed:
        changed = False
        for cl in clauses:
            if any(l in true for l in cl):
                continue
            free = {l for l in cl if -l not in true}
            if not free:
                return true, True
            if len(free) == 1:
                true |= free
                changed = True
    return true, False


def brute_force_max(fn, q):
    best = None
    for bits in itertools.product((0, 1), repeat=q):
        v = fn(bits)
        if best is None or v > best:
            best = v
    return best


def clause_walk(clauses, model):
    """True when every clause has a literal that the model makes true."""
    value = {abs(l): l > 0 for l in model}
    for cl in clauses:
        if not any(value.get(abs(l)) == (l > 0) for l in cl):
            return False
    return True

"""Counter-based SplitMix64 streams.

A stream is identified by ``(seed, label)``.  Its key is
``mix64(seed XOR fnv1a64(label))`` and word ``i`` (0-based) is
``mix64(key + (i + 1) * 0x9E3779B97F4A7C15 mod 2^64)``, where ``mix64`` is
the SplitMix64 finalizer.  Any implementation of these three lines
reproduces the same words, hence the same keys and ciphertexts.
"""

import numpy as np

GOLDEN = 0x9E3779B97F4A7C15
MASK64 = (1 << 64) - 1
_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3


def mix64(z):
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def fnv1a64(data):
    if isinstance(data, str):
        data = data.encode("utf-8")
    h = _FNV_OFFSET
    for byte in data:
        h = ((h ^ byte) * _FNV_PRIME) & MASK64
    return h


def stream_key(seed, label):
    return mix64((seed & MASK64) ^ fnv1a64(label))


def _mix64_array(z):
    z = z ^ (z >> np.uint64(30))
    z = z * np.uint64(0xBF58476D1CE4E5B9)
    z = z ^ (z >> np.uint64(27))
    z = z * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


def stream_words(seed, label, count, start=0):
    """``count`` 64-bit words of the ``(seed, label)`` stream as uint64."""
    key = np.uint64(stream_key(seed, label))
    ctr = np.arange(start + 1, start + count + 1, dtype=np.uint64)
    with np.errstate(over="ignore"):
        return _mix64_array(key + ctr * np.uint64(GOLDEN))


def derive_seed(seed, *path):
    """Child seed for a labelled sub-computation, e.g. ``derive_seed(s, "group", 3)``."""
    label = "/".join(str(p) for p in path)
    return int(stream_words(seed, label, 1)[0])

"""Cumulative-distribution-table sampling of the centered discrete Gaussian."""

import math
from functools import lru_cache

import numpy as np

from .prng import stream_words

CDT_BITS = 63


@lru_cache(maxsize=16)
def cdt_table(sigma, tailcut):
    """Integer CDT over ``-tailcut..tailcut`` scaled to ``2**63``.

    Entry ``j`` is the cumulative weight of values ``<= j - tailcut`` with
    ``rho(x) = exp(-x^2 / (2 sigma^2))``; the last entry is exactly ``2**63``.
    """
    xs = range(-tailcut, tailcut + 1)
    weights = [math.exp(-(x * x) / (2.0 * sigma * sigma)) for x in xs]
    total = math.fsum(weights)
    acc = 0.0
    table = []
    for w in weights:
        acc += w
        table.append(min(round(acc / total * 2 ** CDT_BITS), 2 ** CDT_BITS))
    table[-1] = 2 ** CDT_BITS
    out = np.array(table, dtype=np.uint64)
    out.setflags(write=False)
    return out


def cdt_probabilities(sigma, tailcut):
    """Exact per-value probabilities implied by the integer table."""
    t = [int(v) for v in cdt_table(sigma, tailcut)]
    prev = [0] + t[:-1]
    return np.array([(b - a) / 2 ** CDT_BITS for a, b in zip(prev, t)])


def sample_cdt(sigma, tailcut, seed, label, count):
    """``count`` signed draws from stream ``(seed, label)``.

    Each draw uses the top 63 bits ``u`` of one stream word and returns
    ``j - tailcut`` for the first ``j`` with ``u < table[j]``.
    """
    table = cdt_table(sigma, tailcut)
    u = stream_words(seed, label, count) >> np.uint64(64 - CDT_BITS)
    idx = np.searchsorted(table, u, side="right")
    return idx.astype(np.int64) - tailcut

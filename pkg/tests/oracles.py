"""Straight-line reference implementations used only by the tests.

Each oracle recomputes a result by the most literal route available
(nested loops, Python integers, exhaustive enumeration) and shares no code
with the package.
"""

import itertools
import math
from fractions import Fraction

import numpy as np

Q = 7681


# ---------------------------------------------------------------- arithmetic

def exact_mod_products(a, b0, b1, q=Q):
    return (a * b0) % q, (a * b1) % q


def negacyclic_schoolbook(a, b, c, q=Q):
    """``a*b + c`` in Z_q[x]/(x^n + 1), one Python-int term at a time."""
    n = len(a)
    out = [int(v) for v in c]
    for i in range(n):
        for j in range(n):
            k = i + j
            term = int(a[i]) * int(b[j])
            if k < n:
                out[k] += term
            else:
                out[k - n] -= term
    return [v % q for v in out]


def negacyclic_rolled(a, b, c, q=Q):
    """Same product via negated rotations of ``b``; vectorised per row."""
    n = len(a)
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    acc = np.asarray(c, dtype=np.int64).copy()
    for i in range(n):
        shifted = np.concatenate((-b[n - i:], b[:n - i])) if i else b
        acc += a[i] * shifted
    return acc % q


def ceil_div(a, b):
    return math.ceil(Fraction(a, b))


# ---------------------------------------------------------------- codec

def sad_full_search(prev, cur, bs, radius):
    """Per-block exhaustive SAD search with the (0,0)-then-lexicographic tie rule.

    The source block ``prev[y+dy : y+dy+bs, x+dx : x+dx+bs]`` must stay
    inside the frame.
    """
    prev = np.asarray(prev, dtype=np.int64)
    cur = np.asarray(cur, dtype=np.int64)
    h, w = prev.shape
    out = np.zeros((h // bs, w // bs, 2), dtype=np.int64)
    for by in range(h // bs):
        for bx in range(w // bs):
            y, x = by * bs, bx * bs
            target = cur[y:y + bs, x:x + bs]
            zero = int(np.abs(prev[y:y + bs, x:x + bs] - target).sum())
            best, best_v = None, None
            for dy in range(-radius, radius + 1):
                for dx in range(-radius, radius + 1):
                    sy, sx = y + dy, x + dx
                    if sy < 0 or sx < 0 or sy + bs > h or sx + bs > w:
                        continue
                    s = int(np.abs(prev[sy:sy + bs, sx:sx + bs] - target).sum())
                    if best is None or s < best:
                        best, best_v = s, (dy, dx)
            out[by, bx] = (0, 0) if zero == best else best_v
    return out


def predict_loops(prev, vectors, bs):
    prev = np.asarray(prev)
    h, w = prev.shape
    out = np.zeros_like(prev)
    for y in range(h):
        for x in range(w):
            dy, dx = vectors[y // bs][x // bs]
            sy = min(max(y + dy, 0), h - 1)
            sx = min(max(x + dx, 0), w - 1)
            out[y, x] = prev[sy, sx]
    return out


def round_half_away(v, step):
    """Nearest multiple index of ``v / step``; halves go away from zero."""
    f = Fraction(int(v), int(step))
    mag = math.floor(abs(f) + Fraction(1, 2))
    return mag if f >= 0 else -mag


def layered_reconstructions(values, steps):
    """Partial reconstructions after each layer, recomputed with Fractions."""
    flat = [int(v) for v in np.asarray(values).ravel()]
    recon = [0] * len(flat)
    out = []
    for step in steps:
        recon = [r + round_half_away(v - r, step) * step for v, r in zip(flat, recon)]
        out.append([min(max(r, -255), 255) for r in recon])
    return out


def conv_features_loops(img, kernels):
    """3x3 stride-2 zero-padded convolutions with ReLU, then channel means."""
    x = [np.asarray(img, dtype=np.float64) / 255.0]
    for k in kernels:
        cout, cin = k.shape[:2]
        h, w = x[0].shape
        oh, ow = (h + 1) // 2, (w + 1) // 2
        nxt = []
        for m in range(cout):
            plane = np.zeros((oh, ow))
            for oy in range(oh):
                for ox in range(ow):
                    acc = 0.0
                    for c in range(cin):
                        for i in range(3):
                            for j in range(3):
                                yy, xx = 2 * oy + i - 1, 2 * ox + j - 1
                                if 0 <= yy < h and 0 <= xx < w:
                                    acc += x[c][yy, xx] * k[m, c, i, j]
                    plane[oy, ox] = max(acc, 0.0)
            nxt.append(plane)
        x = nxt
    return np.array([p.mean() for p in x])


# ---------------------------------------------------------------- clustering

def brute_force_kmeans_cost(points, k):
    """Minimum within-cluster sum of squares over every labelling."""
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim == 1:
        pts = pts[:, None]
    best = math.inf
    n = len(pts)
    for labels in itertools.product(range(k), repeat=n):
        if labels[0] != 0 or len(set(labels)) != k:
            continue
        lab = np.array(labels)
        cost = 0.0
        for j in range(k):
            grp = pts[lab == j]
            cost += float(((grp - grp.mean(axis=0)) ** 2).sum())
        best = min(best, cost)
    return best


def kmeanspp_split_probability(points):
    """Exact chance that two D^2-seeded centers land in different pairs of
    the instance ``{0, 1, 10, 11}`` (pairs {0,1} and {10,11})."""
    pts = [Fraction(p) for p in points]
    total = Fraction(0)
    for first in pts:
        d2 = [(p - first) ** 2 for p in pts]
        mass = sum(d2)
        far = sum(d for p, d in zip(pts, d2) if (p < 5) != (first < 5))
        total += Fraction(1, len(pts)) * far / mass
    return total


# ---------------------------------------------------------------- storage

def xor_parity(chunks):
    size = max(len(c) for c in chunks)
    out = bytearray(size)
    for c in chunks:
        for i, b in enumerate(c):
            out[i] ^= b
    return bytes(out)


def crc32_bitwise(data):
    """Reflected CRC-32, polynomial 0xEDB88320, one bit at a time."""
    crc = 0xFFFFFFFF
    for byte in data:
        crc ^= byte
        for _ in range(8):
            crc = (crc >> 1) ^ (0xEDB88320 if crc & 1 else 0)
    return crc ^ 0xFFFFFFFF


# ---------------------------------------------------------------- autoencoder

def central_difference(f, x, h=1e-4):
    g = np.zeros_like(x)
    it = np.nditer(x, flags=["multi_index"])
    for _ in it:
        idx = it.multi_index
        orig = x[idx]
        x[idx] = orig + h
        up = f(x)
        x[idx] = orig - h
        down = f(x)
        x[idx] = orig
        g[idx] = (up - down) / (2 * h)
    return g

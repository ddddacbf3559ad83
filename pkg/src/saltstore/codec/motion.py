"""Exhaustive block matching, motion-compensated prediction and residuals."""

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ..errors import InvalidInputError
from .frames import Frame, MotionVectorField, ResidualFrame


def _check_same_shape(a, b):
    if a.shape != b.shape:
        raise InvalidInputError(f"dimension mismatch: {a.shape} vs {b.shape}")


def estimate_motion(prev, cur, block_size=8, search_radius=7):
    """Full-search SAD block matching of ``cur`` against ``prev``.

    Candidate displacements are limited to those that keep the whole source
    block inside ``prev``.  Among equal-SAD candidates ``(0, 0)`` wins,
    otherwise the lexicographically smallest ``(dy, dx)``.
    """
    _check_same_shape(prev, cur)
    h, w = cur.shape
    if block_size <= 0 or h % block_size or w % block_size:
        raise InvalidInputError(f"block size {block_size} must divide {w}x{h}")
    if search_radius < 0:
        raise InvalidInputError("search radius must be non-negative")

    ref = prev.samples.astype(np.int32)
    tgt = cur.samples.astype(np.int32)
    windows = sliding_window_view(ref, (block_size, block_size))
    rows, cols = h // block_size, w // block_size
    vectors = np.zeros((rows, cols, 2), dtype=np.int16)

    for r in range(rows):
        y0 = r * block_size
        ylo = max(y0 - search_radius, 0)
        yhi = min(y0 + search_radius, h - block_size)
        for c in range(cols):
            x0 = c * block_size
            xlo = max(x0 - search_radius, 0)
            xhi = min(x0 + search_radius, w - block_size)
            block = tgt[y0:y0 + block_size, x0:x0 + block_size]
            cand = windows[ylo:yhi + 1, xlo:xhi + 1]
            sad = np.abs(cand - block).sum(axis=(2, 3))
            if sad[y0 - ylo, x0 - xlo] == sad.min():
                continue
            # argmin scans row-major, i.e. lexicographic in (dy, dx)
            iy, ix = np.unravel_index(np.argmin(sad), sad.shape)
            vectors[r, c] = (ylo + iy - y0, xlo + ix - x0)
    return MotionVectorField(block_size, vectors)


def predict(prev, mv):
    """Translate each block of ``prev`` by its vector; reads are edge-clamped."""
    h, w = prev.shape
    bs = mv.block_size
    if h % bs or w % bs or mv.grid != (h // bs, w // bs):
        raise InvalidInputError(
            f"motion grid {mv.grid} (block {bs}) does not tile a {w}x{h} frame")
    src = prev.samples
    out = np.empty_like(src)
    offs = np.arange(bs)
    for r in range(mv.grid[0]):
        for c in range(mv.grid[1]):
            dy, dx = (int(v) for v in mv.vectors[r, c])
            ys = np.clip(r * bs + dy + offs, 0, h - 1)
            xs = np.clip(c * bs + dx + offs, 0, w - 1)
            out[r * bs:(r + 1) * bs, c * bs:(c + 1) * bs] = src[np.ix_(ys, xs)]
    return Frame(w, h, out)


def residual(cur, predicted):
    _check_same_shape(cur, predicted)
    diff = cur.samples.astype(np.int16) - predicted.samples.astype(np.int16)
    return ResidualFrame(cur.width, cur.height, diff)


def apply_residual(predicted, res):
    """Reconstruct a frame from its prediction, saturating to 8 bits."""
    _check_same_shape(predicted, res)
    out = predicted.samples.astype(np.int32) + res.values
    return Frame(predicted.width, predicted.height, np.clip(out, 0, 255).astype(np.uint8))

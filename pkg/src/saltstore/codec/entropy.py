"""Zero-run / zigzag varint coding of integer sample arrays.

A payload is a sequence of unsigned LEB128 varints alternating
``run, value, run, value, ...`` where ``run`` counts zeros preceding a
nonzero ``value`` (zigzag mapped).  When the zeros run to the end of the
array the stream closes with a lone run.  The decoder is told the element
count, which makes the stream self-terminating.
"""

import numpy as np

from ..errors import DecodeError

_MAX_VARINT_BYTES = 9  # values stay below 2**63


def zigzag(values):
    v = np.asarray(values, dtype=np.int64)
    return ((v << 1) ^ (v >> 63)).astype(np.uint64)


def unzigzag(values):
    u = np.asarray(values, dtype=np.uint64)
    return ((u >> np.uint64(1)).astype(np.int64)) ^ -((u & np.uint64(1)).astype(np.int64))


def encode_varints(values):
    """LEB128-encode a 1-D array of non-negative integers."""
    v = np.asarray(values, dtype=np.uint64).ravel()
    if v.size == 0:
        return b""
    nbytes = np.ones(v.size, dtype=np.int64)
    probe = v >> np.uint64(7)
    while probe.any():
        nbytes += probe > 0
        probe = probe >> np.uint64(7)
    total = int(nbytes.sum())
    owner = np.repeat(np.arange(v.size), nbytes)
    starts = np.cumsum(nbytes) - nbytes
    pos = np.arange(total) - np.repeat(starts, nbytes)
    chunk = (v[owner] >> (np.uint64(7) * pos.astype(np.uint64))) & np.uint64(0x7F)
    last = pos == (nbytes[owner] - 1)
    out = chunk.astype(np.uint8) | np.where(last, 0, 0x80).astype(np.uint8)
    return out.tobytes()


def decode_varints(data):
    """Inverse of :func:`encode_varints`; raises DecodeError on truncation."""
    b = np.frombuffer(bytes(data), dtype=np.uint8)
    if b.size == 0:
        return np.zeros(0, dtype=np.uint64)
    term = (b & 0x80) == 0
    if not term[-1]:
        raise DecodeError("truncated varint")
    ends = np.flatnonzero(term)
    starts = np.concatenate(([0], ends[:-1] + 1))
    lengths = ends - starts + 1
    if lengths.max() > _MAX_VARINT_BYTES:
        raise DecodeError("varint too long")
    pos = np.arange(b.size) - np.repeat(starts, lengths)
    parts = (b & 0x7F).astype(np.uint64) << (np.uint64(7) * pos.astype(np.uint64))
    return np.add.reduceat(parts, starts)


def read_varint(buf, offset):
    """Read one varint from ``buf`` at ``offset``; returns ``(value, next_offset)``."""
    value = 0
    shift = 0
    while True:
        if offset >= len(buf):
            raise DecodeError("truncated varint")
        byte = buf[offset]
        offset += 1
        value |= (byte & 0x7F) << shift
        if not byte & 0x80:
            return value, offset
        shift += 7
        if shift >= 7 * _MAX_VARINT_BYTES:
            raise DecodeError("varint too long")


def write_varint(value):
    return encode_varints(np.array([value], dtype=np.uint64))


def rle_encode(values):
    """Run-length code a flat signed integer array."""
    flat = np.asarray(values, dtype=np.int64).ravel()
    nz = np.flatnonzero(flat)
    runs = np.diff(np.concatenate(([-1], nz))) - 1
    seq = np.empty(2 * nz.size, dtype=np.uint64)
    seq[0::2] = runs.astype(np.uint64)
    seq[1::2] = zigzag(flat[nz])
    tail = flat.size - (int(nz[-1]) + 1 if nz.size else 0)
    if tail > 0:
        seq = np.append(seq, np.uint64(tail))
    return encode_varints(seq)


def rle_decode(data, count):
    """Decode ``count`` signed integers from a run-length payload."""
    seq = decode_varints(data).astype(np.int64)
    if seq.size and seq.max() < 0:
        raise DecodeError("varint overflow")
    out = np.zeros(count, dtype=np.int64)
    if seq.size % 2:
        pairs, tail = seq[:-1], int(seq[-1])
        if tail <= 0:
            raise DecodeError("empty trailing run")
    else:
        pairs, tail = seq, 0
    runs = pairs[0::2]
    zz = pairs[1::2]
    if np.any(zz == 0):
        raise DecodeError("zero literal in run-length payload")
    positions = np.cumsum(runs + 1) - 1
    if positions.size and (positions[-1] >= count or runs.min() < 0):
        raise DecodeError("run-length payload overruns frame")
    end = int(positions[-1]) + 1 if positions.size else 0
    if end + tail != count:
        raise DecodeError(f"run-length payload covers {end + tail} of {count} samples")
    out[positions] = unzigzag(zz.astype(np.uint64))
    return out

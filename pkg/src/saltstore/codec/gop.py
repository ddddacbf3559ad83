"""Group-of-pictures coding: a lossless anchor followed by closed-loop
motion-compensated residual records.

Byte layout of an encoded group (little-endian)::

    "SGOP" | version u8 | width u16 | height u16 | anchor_interval u8
    | K u8 | base_step u8 | anchor_len u32 | anchor payload
    | { record_len u32 | record }*

The anchor payload is the run-length code of the anchor's planar
prediction error ``x[i,j] - x[i,j-1] - x[i-1,j] + x[i-1,j-1]`` (zero
outside the frame), which vanishes on flat areas and linear ramps.

A record is ``varint block_size | varint mv_len | mv payload`` followed by
``varint step | varint len | payload`` for each of the K layers.
"""

import struct
from dataclasses import dataclass

import numpy as np

from ..errors import DecodeError, InvalidInputError
from .entropy import read_varint, rle_decode, rle_encode, write_varint
from .frames import Frame, MotionVectorField
from .layers import LayeredBitstream, decode_layers, encode_layers, layer_steps
from .motion import apply_residual, estimate_motion, predict, residual

MAGIC = b"SGOP"
VERSION = 1
_HEADER = struct.Struct("<4sBHHBBBI")


@dataclass(frozen=True)
class CodecParams:
    num_layers: int = 4
    base_step: int = 8
    block_size: int = 8
    search_radius: int = 7
    anchor_interval: int = 16

    def __post_init__(self):
        layer_steps(self.num_layers, self.base_step)
        if not 1 <= self.anchor_interval <= 255:
            raise InvalidInputError("anchor interval must fit in one byte")
        if self.base_step > 255:
            raise InvalidInputError("base step must fit in one byte")
        if self.block_size <= 0 or self.search_radius < 0:
            raise InvalidInputError("invalid motion search parameters")

    @property
    def lossless(self):
        return layer_steps(self.num_layers, self.base_step)[-1] == 1


@dataclass(frozen=True)
class FrameRecord:
    motion: MotionVectorField
    layers: LayeredBitstream

    def to_bytes(self):
        mv = rle_encode(self.motion.vectors)
        parts = [write_varint(self.motion.block_size), write_varint(len(mv)), mv]
        for step, payload in zip(self.layers.steps, self.layers.payloads):
            parts += [write_varint(step), write_varint(len(payload)), payload]
        return b"".join(parts)

    @classmethod
    def from_bytes(cls, buf, width, height, num_layers):
        bs, off = read_varint(buf, 0)
        if bs == 0 or height % bs or width % bs:
            raise DecodeError(f"record block size {bs} does not tile the frame")
        rows, cols = height // bs, width // bs
        mv_len, off = read_varint(buf, off)
        mv_raw = _take(buf, off, mv_len)
        off += mv_len
        vectors = rle_decode(mv_raw, rows * cols * 2).reshape(rows, cols, 2)
        steps, payloads = [], []
        for _ in range(num_layers):
            step, off = read_varint(buf, off)
            n, off = read_varint(buf, off)
            payloads.append(_take(buf, off, n))
            steps.append(step)
            off += n
        if off != len(buf):
            raise DecodeError("trailing bytes in frame record")
        try:
            layers = LayeredBitstream(width, height, tuple(steps), tuple(payloads))
        except InvalidInputError as exc:
            raise DecodeError(str(exc)) from exc
        return cls(MotionVectorField(bs, vectors), layers)


def _take(buf, off, n):
    if off + n > len(buf):
        raise DecodeError("payload truncated")
    return bytes(buf[off:off + n])


@dataclass(frozen=True)
class EncodedGop:
    width: int
    height: int
    anchor_interval: int
    num_layers: int
    base_step: int
    anchor: bytes
    records: tuple

    def __len__(self):
        return 1 + len(self.records)

    @property
    def record_bytes(self):
        return sum(len(r.to_bytes()) for r in self.records)

    def to_bytes(self):
        out = [_HEADER.pack(MAGIC, VERSION, self.width, self.height,
                            self.anchor_interval, self.num_layers, self.base_step,
                            len(self.anchor)),
               self.anchor]
        for rec in self.records:
            raw = rec.to_bytes()
            out += [struct.pack("<I", len(raw)), raw]
        return b"".join(out)

    @classmethod
    def from_bytes(cls, buf):
        buf = bytes(buf)
        if len(buf) < _HEADER.size:
            raise DecodeError("group header truncated")
        magic, version, w, h, interval, k, base, alen = _HEADER.unpack_from(buf)
        if magic != MAGIC or version != VERSION:
            raise DecodeError("not an encoded group")
        if w == 0 or h == 0 or k == 0:
            raise DecodeError("degenerate group header")
        off = _HEADER.size
        anchor = _take(buf, off, alen)
        off += alen
        records = []
        while off < len(buf):
            if off + 4 > len(buf):
                raise DecodeError("record length truncated")
            (n,) = struct.unpack_from("<I", buf, off)
            off += 4
            records.append(FrameRecord.from_bytes(_take(buf, off, n), w, h, k))
            off += n
        return cls(w, h, interval, k, base, anchor, tuple(records))


def _anchor_encode(samples):
    x = samples.astype(np.int16)
    d = np.diff(np.diff(x, axis=0, prepend=np.int16(0)), axis=1, prepend=np.int16(0))
    return rle_encode(d)


def _anchor_decode(payload, width, height):
    d = rle_decode(payload, width * height).reshape(height, width)
    return d.cumsum(axis=0).cumsum(axis=1)


def _check_frames(frames):
    if not frames:
        raise InvalidInputError("frame sequence is empty")
    shape = frames[0].shape
    for i, f in enumerate(frames):
        if f.shape != shape:
            raise InvalidInputError(f"frame {i} is {f.shape}, expected {shape}")


def encode_gop(frames, params=CodecParams()):
    """Encode one group: ``frames[0]`` becomes the anchor."""
    frames = list(frames)
    _check_frames(frames)
    if len(frames) > params.anchor_interval:
        raise InvalidInputError(
            f"group of {len(frames)} frames exceeds anchor interval {params.anchor_interval}")
    anchor = frames[0]
    h, w = anchor.shape
    if h > 0xFFFF or w > 0xFFFF:
        raise InvalidInputError("frame dimensions must fit in 16 bits")
    records = []
    ref = anchor
    for cur in frames[1:]:
        mv = estimate_motion(ref, cur, params.block_size, params.search_radius)
        pred = predict(ref, mv)
        bits = encode_layers(residual(cur, pred), params.num_layers, params.base_step)
        records.append(FrameRecord(mv, bits))
        # closed loop: the next prediction uses what the decoder will see
        ref = apply_residual(pred, decode_layers(bits))
    return EncodedGop(w, h, params.anchor_interval, params.num_layers, params.base_step,
                      _anchor_encode(anchor.samples), tuple(records))


def decode_gop(g, k_max=None):
    if k_max is None:
        k_max = g.num_layers
    if not 1 <= k_max <= g.num_layers:
        raise InvalidInputError(f"k_max {k_max} outside 1..{g.num_layers}")
    samples = _anchor_decode(g.anchor, g.width, g.height)
    if samples.min(initial=0) < 0 or samples.max(initial=0) > 255:
        raise DecodeError("anchor samples out of 8-bit range")
    ref = Frame(g.width, g.height, samples.astype(np.uint8))
    out = [ref]
    for rec in g.records:
        ref = apply_residual(predict(ref, rec.motion), decode_layers(rec.layers, k_max))
        out.append(ref)
    return out


def encode_sequence(frames, params=CodecParams()):
    """Split ``frames`` into anchor-interval groups and encode each."""
    frames = list(frames)
    _check_frames(frames)
    n = params.anchor_interval
    return [encode_gop(frames[i:i + n], params) for i in range(0, len(frames), n)]


def decode_sequence(groups, k_max=None):
    out = []
    for g in groups:
        out.extend(decode_gop(g, k_max))
    return out

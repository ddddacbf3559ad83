"""Quantizer-pyramid layer stack for residual frames.

Layer ``k`` (1-based) quantizes what is left of the residual after the
first ``k - 1`` layers, with step ``max(base_step >> (k - 1), 1)``.  When
the final step is 1 the stack is lossless.
"""

from dataclasses import dataclass

import numpy as np

from ..errors import DecodeError, InvalidInputError
from .entropy import rle_decode, rle_encode
from .frames import ResidualFrame


def layer_steps(num_layers, base_step):
    """Quantizer step of each layer; strictly decreasing by construction."""
    if num_layers < 1:
        raise InvalidInputError("at least one layer is required")
    if base_step < 1 or base_step & (base_step - 1):
        raise InvalidInputError(f"base step {base_step} is not a power of two")
    depth = base_step.bit_length()
    if num_layers > depth:
        raise InvalidInputError(
            f"{num_layers} layers exceed the {depth}-level pyramid of step {base_step}")
    return tuple(base_step >> k for k in range(num_layers))


def is_lossless(num_layers, base_step):
    return layer_steps(num_layers, base_step)[-1] == 1


def quantize(values, step):
    """Integer division rounding half away from zero."""
    v = np.asarray(values, dtype=np.int64)
    mag = (2 * np.abs(v) + step) // (2 * step)
    return np.sign(v) * mag


@dataclass(frozen=True)
class LayeredBitstream:
    width: int
    height: int
    steps: tuple
    payloads: tuple

    def __post_init__(self):
        if len(self.steps) != len(self.payloads) or not self.steps:
            raise InvalidInputError("one payload per layer step is required")
        if any(b >= a for a, b in zip(self.steps, self.steps[1:])):
            raise InvalidInputError("layer steps must strictly decrease")

    @property
    def num_layers(self):
        return len(self.steps)

    @property
    def nbytes(self):
        return sum(len(p) for p in self.payloads)


def encode_layers(r, num_layers, base_step):
    steps = layer_steps(num_layers, base_step)
    target = r.values.astype(np.int64)
    recon = np.zeros_like(target)
    payloads = []
    for step in steps:
        q = quantize(target - recon, step)
        recon += q * step
        payloads.append(rle_encode(q))
    return LayeredBitstream(r.width, r.height, steps, tuple(payloads))


def decode_layers(b, k_max=None):
    """Sum the dequantized layers ``1..k_max`` (all layers by default).

    Partial sums are saturated to the residual range [-255, 255]; coarse
    quantization can otherwise overshoot by up to half a step.
    """
    if k_max is None:
        k_max = b.num_layers
    if not 1 <= k_max <= b.num_layers:
        raise InvalidInputError(f"k_max {k_max} outside 1..{b.num_layers}")
    count = b.width * b.height
    acc = np.zeros(count, dtype=np.int64)
    for step, payload in zip(b.steps[:k_max], b.payloads[:k_max]):
        q = rle_decode(payload, count)
        if np.abs(q).max(initial=0) * step > 1024:
            raise DecodeError("layer coefficient out of range")
        acc += q * step
    return ResidualFrame(b.width, b.height, np.clip(acc, -255, 255))

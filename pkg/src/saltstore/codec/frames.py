"""Sample-grid value types used throughout the codec."""

from dataclasses import dataclass, field

import numpy as np

from ..errors import InvalidInputError


def _frozen(arr, dtype):
    out = np.array(arr, dtype=dtype, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class Frame:
    """Single-channel 8-bit picture, stored row-major as ``(height, width)``."""

    width: int
    height: int
    samples: np.ndarray

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise InvalidInputError("frame dimensions must be positive")
        arr = np.asarray(self.samples)
        if arr.size != self.width * self.height:
            raise InvalidInputError(
                f"expected {self.width * self.height} samples, got {arr.size}")
        if arr.dtype != np.uint8:
            if arr.size and (arr.min() < 0 or arr.max() > 255):
                raise InvalidInputError("samples must be 8-bit")
        object.__setattr__(self, "samples",
                           _frozen(arr.reshape(self.height, self.width), np.uint8))

    @classmethod
    def from_array(cls, arr):
        arr = np.asarray(arr)
        if arr.ndim != 2:
            raise InvalidInputError("frame array must be 2-D")
        return cls(arr.shape[1], arr.shape[0], arr)

    @property
    def shape(self):
        return (self.height, self.width)

    def __eq__(self, other):
        if not isinstance(other, Frame):
            return NotImplemented
        return self.shape == other.shape and np.array_equal(self.samples, other.samples)

    __hash__ = None


@dataclass(frozen=True, eq=False)
class ResidualFrame:
    width: int
    height: int
    values: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.values)
        if arr.size != self.width * self.height:
            raise InvalidInputError("residual sample count does not match dimensions")
        if arr.size and np.abs(arr.astype(np.int32)).max() > 255:
            raise InvalidInputError("residual values must lie in [-255, 255]")
        object.__setattr__(self, "values",
                           _frozen(arr.reshape(self.height, self.width), np.int16))

    @property
    def shape(self):
        return (self.height, self.width)

    def __eq__(self, other):
        if not isinstance(other, ResidualFrame):
            return NotImplemented
        return self.shape == other.shape and np.array_equal(self.values, other.values)

    __hash__ = None


@dataclass(frozen=True, eq=False)
class MotionVectorField:
    """Per-block ``(dy, dx)`` displacements; the source of the block at
    ``(y, x)`` is the reference block at ``(y + dy, x + dx)``."""

    block_size: int
    vectors: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.block_size <= 0:
            raise InvalidInputError("block size must be positive")
        arr = np.asarray(self.vectors)
        if arr.ndim != 3 or arr.shape[2] != 2:
            raise InvalidInputError("vectors must have shape (rows, cols, 2)")
        object.__setattr__(self, "vectors", _frozen(arr, np.int16))

    @property
    def grid(self):
        return self.vectors.shape[:2]

    @classmethod
    def zeros(cls, height, width, block_size):
        return cls(block_size, np.zeros((height // block_size, width // block_size, 2)))

    def __eq__(self, other):
        if not isinstance(other, MotionVectorField):
            return NotImplemented
        return (self.block_size == other.block_size
                and np.array_equal(self.vectors, other.vectors))

    __hash__ = None

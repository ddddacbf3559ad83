"""Software models of the lattice-crypto multiplier kernels.

* :func:`mod_reduce_approx` -- shift/fold reduction modulo 7681 = 2^13 - 2^9 + 1.
* :func:`sdmm_packed` -- one wide multiply yielding two signed modular
  products from 18-bit fields.
* :func:`hspm_multiply` -- ``d = a*b + c`` in Z_q[x]/(x^n + 1) on a schedule of
  n/2 dual-product lanes, with cycle accounting.

Scalar entry points validate their operands; the ``*_array`` variants are
the vectorized datapaths they share.
"""

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError

Q = 7681
FIELD_BITS = 18
FIELD_MASK = (1 << FIELD_BITS) - 1
SIGNED_BOUND = 31              # 6-bit signed magnitude
SDMM_LATENCY = 2               # cycles from operands to reduced product

_K, _M = 13, 9                 # q = 2^K - 2^M + 1  =>  2^K == 2^M - 1 (mod q)
_LOW = (1 << _K) - 1


def _check_modulus(q):
    if q != (1 << _K) - (1 << _M) + 1:
        raise InvalidInputError(f"fold constants are derived for q = 7681, not {q}")


def fold(x):
    """One fold round: ``lo + hi * (2^9 - 1)`` computed as shift-and-subtract."""
    hi = x >> _K
    return (x & _LOW) + (hi << _M) - hi


def _reduce_inplace(x):
    for _ in range(2):
        hi = x >> _K
        x &= _LOW
        x += (hi << _M) - hi
    x -= Q * (x >= Q)
    return x


def mod_reduce_approx_array(x):
    """Vectorized reduction of values in [0, 2^18); no range check."""
    return _reduce_inplace(np.array(x, dtype=np.int64, copy=True))


def mod_reduce_approx(x, q=Q):
    """Reduce ``x`` in [0, 2^18) modulo 7681 with two folds and one
    conditional subtraction."""
    _check_modulus(q)
    if not 0 <= x <= FIELD_MASK:
        raise InvalidInputError(f"{x} outside the 18-bit reduction domain")
    x = fold(fold(int(x)))
    return x - q if x >= q else x


def sdmm_packed_array(a, b0, b1, q=Q):
    """Vectorized dual signed multiply; broadcasts its operands."""
    a = np.asarray(a, dtype=np.int64)
    b0 = np.asarray(b0, dtype=np.int64)
    b1 = np.asarray(b1, dtype=np.int64)
    raw = a * (np.abs(b0) + (np.abs(b1) << FIELD_BITS))
    r0 = _apply_sign(mod_reduce_approx_array(raw & FIELD_MASK), b0 < 0, q)
    r1 = _apply_sign(mod_reduce_approx_array(raw >> FIELD_BITS), b1 < 0, q)
    return r0, r1


def _apply_sign(r, negative, q):
    # sign bit selects q - r; a zero product stays zero
    return np.where(negative & (r != 0), q - r, r)


def sdmm_packed(a, b0, b1, q=Q):
    """Return ``(a*b0 mod q, a*b1 mod q)`` from one packed multiplication."""
    _check_modulus(q)
    if not 0 <= a < q:
        raise InvalidInputError(f"a = {a} outside [0, {q})")
    for b in (b0, b1):
        if abs(b) > SIGNED_BOUND:
            raise InvalidInputError(f"b = {b} exceeds the 6-bit signed range")
    r0, r1 = sdmm_packed_array(a, b0, b1, q)
    return int(r0), int(r1)


def packed_product(a, b0, b1):
    """Raw wide-multiplier output before field extraction."""
    return a * (abs(b0) + (abs(b1) << FIELD_BITS))


@dataclass(frozen=True)
class CycleCount:
    load: int
    compute: int
    readout: int

    @property
    def total(self):
        return self.load + self.compute + self.readout


def hspm_cycles(n):
    return CycleCount(load=n, compute=n + SDMM_LATENCY, readout=n)


def hspm_multiply(a, b, c, q=Q):
    """Compute ``d = a*b + c`` in Z_q[x]/(x^n + 1).

    ``a`` and ``c`` are reduced coefficient vectors, ``b`` holds signed
    coefficients of magnitude <= 31.  Each of the n accumulate steps
    broadcasts one ``a_i`` to n/2 lanes; lane ``l`` multiplies it by the
    packed pair ``(b_2l, b_2l+1)``.  All steps are evaluated together here.

    Returns ``(d, CycleCount)``.
    """
    _check_modulus(q)
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    c = np.asarray(c, dtype=np.int64)
    n = a.shape[0]
    if a.shape != (n,) or b.shape != (n,) or c.shape != (n,):
        raise InvalidInputError("a, b and c must all have degree n")
    if n % 2:
        raise InvalidInputError("degree must be even to fill dual-product lanes")
    if a.min() < 0 or a.max() >= q or c.min() < 0 or c.max() >= q:
        raise InvalidInputError(f"a and c must be reduced modulo {q}")
    if np.abs(b).max() > SIGNED_BOUND:
        raise InvalidInputError("b coefficients exceed the 6-bit signed range")

    # lane l holds the packed pair (b_2l, b_2l+1); every step feeds it a_i
    mag = np.abs(b)
    packed = mag[0::2] + (mag[1::2] << FIELD_BITS)
    raw = a[:, None] * packed[None, :]
    fields = np.empty((n, n // 2, 2), dtype=np.int32)
    fields[..., 0] = raw & FIELD_MASK
    fields[..., 1] = raw >> FIELD_BITS
    prod = _apply_sign(_reduce_inplace(fields.reshape(n, n)), (b < 0)[None, :], q)

    # accumulator k collects a_i * b_j for i + j = k; skewing row i by i
    # lines those products up in column k of a 2n-1 wide array
    skew = np.zeros((n, 2 * n), dtype=np.int64)
    skew[:, :n] = prod
    full = skew.ravel()[:n * (2 * n - 1)].reshape(n, 2 * n - 1).sum(axis=0)
    acc = full[:n]
    acc[:n - 1] -= full[n:]          # x^n = -1
    d = (acc + c) % q
    return d, hspm_cycles(n)

"""Ring-LWE public-key encryption (LPR form) over Z_q[x]/(x^n + 1).

Every ring product goes through :func:`saltstore.mulkern.hspm_multiply`,
so the uniform operand is always the left factor and the small signed
operand the right one::

    keygen:   b  = a*s + e
    encrypt:  c1 = a*r + e1,   c2 = b*r + (e2 + encode(m))
    decrypt:  m  = decode(c2 - c1*s)
"""

from dataclasses import dataclass

import numpy as np

from .. import mulkern
from ..errors import InvalidInputError
from .gaussian import sample_cdt
from .prng import stream_words


@dataclass(frozen=True)
class RingParams:
    n: int = 256
    q: int = mulkern.Q
    sigma: float = 3.2
    tailcut: int = 31

    def __post_init__(self):
        if self.n <= 0 or self.n % 2:
            raise InvalidInputError("n must be a positive even degree")
        if self.q.bit_length() != 13:
            raise InvalidInputError(f"q = {self.q} is not a 13-bit modulus")
        if not 0 < self.tailcut <= mulkern.SIGNED_BOUND:
            raise InvalidInputError("tailcut must fit a 6-bit signed sample")
        if not self.sigma > 0:
            raise InvalidInputError("sigma must be positive")
        mulkern._check_modulus(self.q)

    @property
    def half_q(self):
        return self.q // 2


DEFAULT_PARAMS = RingParams()


def _frozen(values, dtype=np.int64):
    a = np.array(values, dtype=dtype, copy=True)
    a.setflags(write=False)
    return a


class _Poly:
    __slots__ = ("coeffs",)

    def __init__(self, coeffs):
        self.coeffs = _frozen(coeffs)

    def __len__(self):
        return len(self.coeffs)

    def __eq__(self, other):
        return type(self) is type(other) and np.array_equal(self.coeffs, other.coeffs)

    __hash__ = None

    def __repr__(self):
        head = ", ".join(str(int(v)) for v in self.coeffs[:4])
        return f"{type(self).__name__}([{head}, ...], n={len(self)})"


class RingPoly(_Poly):
    """Element of Z_q[x]/(x^n + 1) with coefficients in [0, q)."""

    __slots__ = ()

    def __init__(self, coeffs, params=DEFAULT_PARAMS):
        super().__init__(coeffs)
        if self.coeffs.shape != (params.n,):
            raise InvalidInputError(f"expected {params.n} coefficients")
        if self.coeffs.min() < 0 or self.coeffs.max() >= params.q:
            raise InvalidInputError(f"coefficients must be reduced modulo {params.q}")


class SignedPoly(_Poly):
    """Small polynomial with coefficients in [-tailcut, tailcut]."""

    __slots__ = ()

    def __init__(self, coeffs, params=DEFAULT_PARAMS):
        super().__init__(coeffs)
        if self.coeffs.shape != (params.n,):
            raise InvalidInputError(f"expected {params.n} coefficients")
        if np.abs(self.coeffs).max() > params.tailcut:
            raise InvalidInputError(f"coefficients exceed tailcut {params.tailcut}")

    def reduced(self, params=DEFAULT_PARAMS):
        return RingPoly(self.coeffs % params.q, params)


@dataclass(frozen=True)
class PublicKey:
    a: RingPoly
    b: RingPoly


@dataclass(frozen=True)
class KeyPair:
    public: PublicKey
    secret: SignedPoly
    params: RingParams = DEFAULT_PARAMS


@dataclass(frozen=True)
class Ciphertext:
    c1: RingPoly
    c2: RingPoly


@dataclass(frozen=True, eq=False)
class Plaintext:
    bits: np.ndarray

    def __post_init__(self):
        bits = np.asarray(self.bits)
        if bits.ndim != 1 or (bits.size and not np.isin(bits, (0, 1)).all()):
            raise InvalidInputError("plaintext must be a flat bit sequence")
        object.__setattr__(self, "bits", _frozen(bits, np.uint8))

    def __eq__(self, other):
        return isinstance(other, Plaintext) and np.array_equal(self.bits, other.bits)

    __hash__ = None

    @classmethod
    def from_bytes(cls, data):
        return cls(np.unpackbits(np.frombuffer(bytes(data), dtype=np.uint8), bitorder="little"))

    def to_bytes(self):
        return np.packbits(self.bits, bitorder="little").tobytes()


def sample_gaussian_signed(params, seed, stream):
    return SignedPoly(sample_cdt(params.sigma, params.tailcut, seed, stream, params.n), params)


def sample_uniform(params, seed, stream):
    # modulo bias is q / 2^64, far below anything observable
    words = stream_words(seed, stream, params.n)
    return RingPoly((words % np.uint64(params.q)).astype(np.int64), params)


def _mul_add(a, b, c, params):
    d, _ = mulkern.hspm_multiply(a.coeffs, b.coeffs, c.coeffs, params.q)
    return RingPoly(d, params)


def keygen(params=DEFAULT_PARAMS, seed=0):
    s = sample_gaussian_signed(params, seed, "s")
    e = sample_gaussian_signed(params, seed, "e")
    a = sample_uniform(params, seed, "a")
    b = _mul_add(a, s, e.reduced(params), params)
    return KeyPair(PublicKey(a, b), s, params)


def encode_message(m, params=DEFAULT_PARAMS):
    if m.bits.shape != (params.n,):
        raise InvalidInputError(f"plaintext must hold exactly {params.n} bits")
    return RingPoly(m.bits.astype(np.int64) * params.half_q, params)


def decode_message(p, params=DEFAULT_PARAMS):
    """Bit ``i`` is 1 when coefficient ``i`` lies within q/4 of floor(q/2)."""
    dist = np.abs(p.coeffs - params.half_q)
    return Plaintext((4 * dist < params.q).astype(np.uint8))


def encrypt(m, pk, params=DEFAULT_PARAMS, seed=0):
    pk = getattr(pk, "public", pk)
    r = sample_gaussian_signed(params, seed, "r")
    e1 = sample_gaussian_signed(params, seed, "e1")
    e2 = sample_gaussian_signed(params, seed, "e2")
    msg = encode_message(m, params)
    c1 = _mul_add(pk.a, r, e1.reduced(params), params)
    c2 = _mul_add(pk.b, r, RingPoly((e2.coeffs + msg.coeffs) % params.q, params), params)
    return Ciphertext(c1, c2)


def decrypt(ct, sk, params=DEFAULT_PARAMS):
    """Recover the plaintext; a wrong key yields unrelated bits, not an error."""
    s = getattr(sk, "secret", sk)
    zero = RingPoly(np.zeros(params.n, dtype=np.int64), params)
    c1s = _mul_add(ct.c1, s, zero, params)
    return decode_message(RingPoly((ct.c2.coeffs - c1s.coeffs) % params.q, params), params)


def noise(ct, m, sk, params=DEFAULT_PARAMS):
    """Centered ``c2 - c1*s - encode(m)``: the term decryption must tolerate."""
    s = getattr(sk, "secret", sk)
    zero = RingPoly(np.zeros(params.n, dtype=np.int64), params)
    c1s = _mul_add(ct.c1, s, zero, params).coeffs
    raw = (ct.c2.coeffs - c1s - encode_message(m, params).coeffs) % params.q
    return np.where(raw > params.half_q, raw - params.q, raw)

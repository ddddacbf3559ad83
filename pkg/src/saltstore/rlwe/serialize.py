"""``SLWE`` byte format for keys and ciphertexts.

``"SLWE" | version u8 | n u16 | q u16`` followed by one or more polynomials,
each ``n`` coefficients packed as 13-bit little-endian fields and zero-padded
to a byte boundary.  Key files carry ``a, b, s`` (``s`` stored modulo q),
public keys ``a, b`` and ciphertexts ``c1, c2``.
"""

import struct

import numpy as np

from ..errors import DecodeError
from .scheme import Ciphertext, KeyPair, PublicKey, RingParams, RingPoly, SignedPoly

MAGIC = b"SLWE"
VERSION = 1
COEFF_BITS = 13
_HEADER = struct.Struct("<4sBHH")


def pack13(coeffs):
    c = np.asarray(coeffs, dtype=np.int64)
    bits = ((c[:, None] >> np.arange(COEFF_BITS)) & 1).astype(np.uint8)
    return np.packbits(bits.ravel(), bitorder="little").tobytes()


def unpack13(data, n):
    bits = np.unpackbits(np.frombuffer(data, dtype=np.uint8), bitorder="little")
    bits = bits[:n * COEFF_BITS].reshape(n, COEFF_BITS).astype(np.int64)
    return (bits << np.arange(COEFF_BITS)).sum(axis=1)


def poly_nbytes(n):
    return (n * COEFF_BITS + 7) // 8


def _dump(params, polys):
    head = _HEADER.pack(MAGIC, VERSION, params.n, params.q)
    return head + b"".join(pack13(p) for p in polys)


def _load(data, count):
    data = bytes(data)
    if len(data) < _HEADER.size:
        raise DecodeError("SLWE header truncated")
    magic, version, n, q = _HEADER.unpack_from(data)
    if magic != MAGIC or version != VERSION:
        raise DecodeError("not an SLWE object")
    try:
        params = RingParams(n=n, q=q)
    except ValueError as exc:
        raise DecodeError(f"unsupported ring: {exc}") from exc
    size = poly_nbytes(n)
    body = data[_HEADER.size:]
    if len(body) != count * size:
        raise DecodeError(f"expected {count} polynomials of {size} bytes")
    polys = [unpack13(body[i * size:(i + 1) * size], n) for i in range(count)]
    for p in polys:
        if p.max() >= q:
            raise DecodeError("coefficient not reduced")
    return params, polys


def dump_keypair(kp):
    p = kp.params
    return _dump(p, [kp.public.a.coeffs, kp.public.b.coeffs, kp.secret.coeffs % p.q])


def load_keypair(data):
    params, (a, b, s) = _load(data, 3)
    s = np.where(s > params.half_q, s - params.q, s)
    try:
        secret = SignedPoly(s, params)
    except ValueError as exc:
        raise DecodeError(str(exc)) from exc
    return KeyPair(PublicKey(RingPoly(a, params), RingPoly(b, params)), secret, params)


def dump_public_key(pk, params):
    return _dump(params, [pk.a.coeffs, pk.b.coeffs])


def load_public_key(data):
    params, (a, b) = _load(data, 2)
    return PublicKey(RingPoly(a, params), RingPoly(b, params)), params


def dump_ciphertext(ct, params):
    return _dump(params, [ct.c1.coeffs, ct.c2.coeffs])


def load_ciphertext(data):
    params, (c1, c2) = _load(data, 2)
    return Ciphertext(RingPoly(c1, params), RingPoly(c2, params)), params


def ciphertext_body(ct):
    """Header-less ``c1 || c2`` packing used inside archive segments."""
    return pack13(ct.c1.coeffs) + pack13(ct.c2.coeffs)


def ciphertext_from_body(data, params):
    size = poly_nbytes(params.n)
    if len(data) != 2 * size:
        raise DecodeError("ciphertext body has the wrong length")
    c1, c2 = unpack13(data[:size], params.n), unpack13(data[size:], params.n)
    if c1.max() >= params.q or c2.max() >= params.q:
        raise DecodeError("coefficient not reduced")
    return Ciphertext(RingPoly(c1, params), RingPoly(c2, params))

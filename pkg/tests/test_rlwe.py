import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from saltstore.errors import DecodeError, InvalidInputError
from saltstore.mulkern import hspm_multiply
from saltstore.rlwe import (DEFAULT_PARAMS, Ciphertext, Plaintext, RingParams, RingPoly,
                            cdt_probabilities, decode_message, decrypt, derive_seed,
                            dump_ciphertext, dump_keypair, dump_public_key, encode_message,
                            encrypt, keygen, load_ciphertext, load_keypair, load_public_key,
                            noise, sample_cdt, sample_gaussian_signed,
                            stream_words)
from saltstore.rlwe.prng import fnv1a64, mix64
from saltstore.rlwe.serialize import pack13, unpack13

P = DEFAULT_PARAMS


def random_message(rng):
    return Plaintext(rng.integers(0, 2, 256))


# ---------------------------------------------------------------- generator

def test_splitmix_reference_words():
    # published SplitMix64 outputs for state 0
    assert mix64(0x9E3779B97F4A7C15) == 0xE220A8397B1DCDAF
    assert mix64(2 * 0x9E3779B97F4A7C15 & (2 ** 64 - 1)) == 0x6E789E6AA1B965F4


def test_fnv_reference_values():
    assert fnv1a64("") == 0xCBF29CE484222325
    assert fnv1a64("a") == 0xAF63DC4C8601EC8C


def test_stream_words_match_scalar_definition():
    key = mix64(5 ^ fnv1a64("x"))
    expect = [mix64(key + (i + 1) * 0x9E3779B97F4A7C15) for i in range(6)]
    assert stream_words(5, "x", 6).tolist() == expect
    assert stream_words(5, "x", 3, start=3).tolist() == expect[3:]


def test_derive_seed_distinct_paths():
    seeds = {derive_seed(1, g, b) for g in range(4) for b in range(4)}
    assert len(seeds) == 16


# ---------------------------------------------------------------- sampling

def test_gaussian_deterministic_and_bounded():
    a = sample_gaussian_signed(P, 9, "e")
    b = sample_gaussian_signed(P, 9, "e")
    assert a == b
    assert np.abs(a.coeffs).max() <= 31
    assert a != sample_gaussian_signed(P, 9, "r")


def test_gaussian_moments_match_table():
    x = sample_cdt(3.2, 31, seed=2024, label="moments", count=10 ** 6)
    probs = cdt_probabilities(3.2, 31)
    support = np.arange(-31, 32)
    var = float((probs * support ** 2).sum() - ((probs * support).sum()) ** 2)
    assert abs(x.mean()) < 0.05
    assert abs(x.var() - var) < 0.1 * var
    assert x.min() >= -31 and x.max() <= 31


def test_gaussian_table_probabilities_are_gaussian():
    probs = cdt_probabilities(3.2, 31)
    support = np.arange(-31, 32)
    rho = np.exp(-support ** 2 / (2 * 3.2 ** 2))
    assert np.allclose(probs, rho / rho.sum(), atol=1e-15)
    assert probs.sum() == pytest.approx(1.0, abs=1e-15)


def test_gaussian_frequencies_chi_square():
    x = sample_cdt(3.2, 31, seed=77, label="chi", count=200_000)
    probs = cdt_probabilities(3.2, 31)
    core = np.arange(-9, 10)
    observed = np.array([(x == v).sum() for v in core] + [(np.abs(x) > 9).sum()])
    expected = np.append(probs[core + 31], probs[np.abs(np.arange(-31, 32)) > 9].sum())
    expected = expected * len(x)
    _, p = stats.chisquare(observed, expected)
    assert p > 0.001


def test_uniform_chi_square():
    a = np.concatenate([keygen(P, seed=s).public.a.coeffs for s in range(40)])
    assert a.size >= 10_000
    counts = np.bincount(a * 16 // P.q, minlength=16)
    _, p = stats.chisquare(counts)
    assert p > 0.001


# ---------------------------------------------------------------- scheme

def test_keygen_reproducible():
    assert dump_keypair(keygen(P, 3)) == dump_keypair(keygen(P, 3))
    assert dump_keypair(keygen(P, 3)) != dump_keypair(keygen(P, 4))


def test_keypair_error_is_small():
    kp = keygen(P, 11)
    zero = np.zeros(256, dtype=np.int64)
    as_, _ = hspm_multiply(kp.public.a.coeffs, kp.secret.coeffs, zero)
    e = (kp.public.b.coeffs - as_) % P.q
    e = np.where(e > P.half_q, e - P.q, e)
    assert np.abs(e).max() <= 31


def test_encode_alternating_bits():
    bits = np.tile([1, 0], 128)
    enc = encode_message(Plaintext(bits))
    assert enc.coeffs[:4].tolist() == [3840, 0, 3840, 0]


def test_encode_zero_and_decode_roundtrip():
    assert not encode_message(Plaintext(np.zeros(256, dtype=int))).coeffs.any()
    rng = np.random.default_rng(0)
    m = random_message(rng)
    assert decode_message(encode_message(m)) == m


def test_decode_threshold_edges():
    # q/4 = 1920.25: distance 1920 from 3840 still decodes to 1, 1921 does not
    c = np.zeros(256, dtype=np.int64)
    c[:4] = 3840 - 1920, 3840 - 1921, 3840 + 1920, 3840 + 1921
    assert decode_message(RingPoly(c)).bits[:4].tolist() == [1, 0, 1, 0]


def test_encrypt_deterministic_and_seed_sensitive():
    kp = keygen(P, 1)
    m = random_message(np.random.default_rng(1))
    a, b = encrypt(m, kp, P, 5), encrypt(m, kp, P, 5)
    assert a == b
    assert encrypt(m, kp, P, 6).c1 != a.c1
    for poly in (a.c1, a.c2):
        assert poly.coeffs.min() >= 0 and poly.coeffs.max() < P.q


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2 ** 64 - 1), st.integers(0, 2 ** 64 - 1))
def test_roundtrip_and_noise_margin(key_seed, enc_seed):
    kp = keygen(P, key_seed)
    m = random_message(np.random.default_rng(enc_seed % 2 ** 32))
    ct = encrypt(m, kp.public, P, enc_seed)
    assert decrypt(ct, kp, P) == m
    assert np.abs(noise(ct, m, kp, P)).max() * 4 < P.q


def test_wrong_key_gives_coin_flips():
    rng = np.random.default_rng(3)
    kp, other = keygen(P, 100), keygen(P, 200)
    agree = 0
    for i in range(100):
        m = random_message(rng)
        agree += int((decrypt(encrypt(m, kp, P, i), other, P).bits == m.bits).sum())
    assert abs(agree / 25600 - 0.5) < 0.05


def test_zero_ciphertext_decrypts_to_zero():
    z = RingPoly(np.zeros(256, dtype=np.int64))
    assert not decrypt(Ciphertext(z, z), keygen(P, 0), P).bits.any()


def test_params_validation():
    with pytest.raises(InvalidInputError):
        RingParams(q=12289)
    with pytest.raises(InvalidInputError):
        RingParams(tailcut=40)
    with pytest.raises(InvalidInputError):
        RingPoly(np.full(256, P.q))
    with pytest.raises(InvalidInputError):
        encode_message(Plaintext(np.zeros(10, dtype=int)))


# ---------------------------------------------------------------- serialization

@given(st.lists(st.integers(0, 8191), min_size=1, max_size=64))
def test_pack13_bit_layout(coeffs):
    packed = pack13(coeffs)
    bitstring = "".join(format(c, "013b")[::-1] for c in coeffs)
    bitstring += "0" * (-len(bitstring) % 8)
    expect = bytes(int(bitstring[i:i + 8][::-1], 2) for i in range(0, len(bitstring), 8))
    assert packed == expect
    assert unpack13(packed, len(coeffs)).tolist() == coeffs


def test_key_and_ciphertext_roundtrip():
    kp = keygen(P, 8)
    raw = dump_keypair(kp)
    assert raw[:4] == b"SLWE" and raw[4] == 1
    assert int.from_bytes(raw[5:7], "little") == 256
    assert int.from_bytes(raw[7:9], "little") == 7681
    assert len(raw) == 9 + 3 * 416
    back = load_keypair(raw)
    assert back.secret == kp.secret and back.public.b == kp.public.b
    pk, params = load_public_key(dump_public_key(kp.public, P))
    assert pk.a == kp.public.a and params == P
    ct = encrypt(Plaintext.from_bytes(bytes(range(32))), kp, P, 1)
    ct2, _ = load_ciphertext(dump_ciphertext(ct, P))
    assert ct2 == ct
    assert decrypt(ct2, back, P).to_bytes() == bytes(range(32))


def test_serialization_rejects_garbage():
    with pytest.raises(DecodeError):
        load_keypair(b"SLWX" + bytes(20))
    with pytest.raises(DecodeError):
        load_keypair(dump_keypair(keygen(P, 0))[:-1])
    bad = bytearray(dump_public_key(keygen(P, 0).public, P))
    bad[9:11] = b"\xff\xff"         # first coefficient 8191 >= q
    with pytest.raises(DecodeError):
        load_public_key(bytes(bad))

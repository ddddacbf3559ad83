"""Ring-LWE public-key encryption on the modelled multiplier kernels."""

from .gaussian import cdt_probabilities, cdt_table, sample_cdt
from .prng import derive_seed, stream_words
from .scheme import (DEFAULT_PARAMS, Ciphertext, KeyPair, Plaintext, PublicKey,
                     RingParams, RingPoly, SignedPoly, decode_message, decrypt,
                     encode_message, encrypt, keygen, noise, sample_gaussian_signed,
                     sample_uniform)
from .serialize import (ciphertext_body, ciphertext_from_body, dump_ciphertext,
                        dump_keypair, dump_public_key, load_ciphertext, load_keypair,
                        load_public_key)

__all__ = [
    "DEFAULT_PARAMS", "Ciphertext", "KeyPair", "Plaintext", "PublicKey", "RingParams",
    "RingPoly", "SignedPoly", "cdt_probabilities", "cdt_table", "ciphertext_body",
    "ciphertext_from_body", "decode_message", "decrypt", "derive_seed",
    "dump_ciphertext", "dump_keypair", "dump_public_key", "encode_message", "encrypt",
    "keygen", "load_ciphertext", "load_keypair", "load_public_key", "noise",
    "sample_cdt", "sample_gaussian_signed", "sample_uniform", "stream_words",
]

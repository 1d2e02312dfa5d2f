"""Secret-key encryption and Naor-style bit commitment over ToyCipher.

Bit strings are tuples of 0/1 ints, most significant bit first.
"""

import logging
from dataclasses import dataclass

from toycipher import toy_prg

logger = logging.getLogger(__name__)

DEFAULT_KAPPA = 64
DEFAULT_LAMBDA = 24
PAYLOAD_BITS = 7
INDEX_BITS = 64


class LengthMismatchError(ValueError):
    """Inputs of incompatible lengths."""


class IndexReuseError(ValueError):
    """A ciphertext index was used twice under one key."""


def int_to_bits(value, n):
    return tuple((value >> (n - 1 - i)) & 1 for i in range(n))


def bits_to_int(bits):
    value = 0
    for bit in bits:
        value = (value << 1) | bit
    return value


def bits_to_bytes(bits):
    """Pack bits MSB-first, zero-padding the final byte."""

    bits = tuple(bits)
    pad = -len(bits) % 8
    return bits_to_int(bits + (0,) * pad).to_bytes((len(bits) + pad) // 8, "big")


def bytes_to_bits(data, n=None):
    n = len(data) * 8 if n is None else n
    if n > len(data) * 8:
        raise LengthMismatchError(f"{len(data)} bytes cannot hold {n} bits")
    total = len(data) * 8
    return int_to_bits(int.from_bytes(data, "big"), total)[:n]


def random_bits(rng, n):
    """n uniform bits from a numpy Generator."""

    if n == 0:
        return ()
    raw = rng.bytes((n + 7) // 8)
    return bytes_to_bits(raw, n)


def xor_bits(a, b):
    if len(a) != len(b):
        raise LengthMismatchError(f"cannot xor {len(a)} bits with {len(b)}")
    return tuple(x ^ y for x, y in zip(a, b))


@dataclass(frozen=True)
class SecretKey:
    bits: tuple

    @property
    def kappa(self):
        return len(self.bits)

    def __repr__(self):
        return f"<SecretKey kappa={self.kappa}>"


def gen_key(rng, kappa=DEFAULT_KAPPA):
    if not 1 <= kappa <= 64:
        raise ValueError("kappa must be between 1 and 64")
    return SecretKey(random_bits(rng, kappa))


def keystream_key(sk, index):
    """128-bit PRG key: sk right-aligned in 64 bits, then the 64-bit index."""

    return (bits_to_int(sk.bits) << INDEX_BITS) | index


@dataclass(frozen=True)
class Ciphertext:
    index: int
    body: tuple

    def to_bytes(self):
        return bits_to_bytes(self.body)

    @classmethod
    def from_bytes(cls, index, data, payload_bits=PAYLOAD_BITS):
        return cls(index, bytes_to_bits(data, 1 + payload_bits))


def enc(sk, index, m, payload_bits=PAYLOAD_BITS):
    """Encrypt payload integer m, or None for the dummy message.

    Frame = validity bit || payload_bits of payload, xored with the keystream.
    """

    if not 0 <= index < 1 << INDEX_BITS:
        raise ValueError("index out of range")
    if m is None:
        frame = (0,) * (1 + payload_bits)
    else:
        if not 0 <= m < 1 << payload_bits:
            raise LengthMismatchError(f"payload {m} does not fit in {payload_bits} bits")
        frame = (1,) + int_to_bits(m, payload_bits)
    stream = toy_prg(keystream_key(sk, index), len(frame))
    return Ciphertext(index, xor_bits(frame, stream))


def dec(sk, ct, payload_bits=PAYLOAD_BITS):
    """Payload integer, or None when the validity bit is clear."""

    if len(ct.body) != 1 + payload_bits:
        raise LengthMismatchError("ciphertext length does not match the session frame")
    frame = xor_bits(ct.body, toy_prg(keystream_key(sk, ct.index), len(ct.body)))
    if not frame[0]:
        return None
    return bits_to_int(frame[1:])


class Encryptor:
    """Encryption under one key, refusing to reuse an index."""

    def __init__(self, sk, payload_bits=PAYLOAD_BITS):
        self.sk = sk
        self.payload_bits = payload_bits
        self.used = set()

    def enc(self, index, m):
        if index in self.used:
            raise IndexReuseError(f"index {index} already used under this key")
        self.used.add(index)
        return enc(self.sk, index, m, self.payload_bits)


@dataclass(frozen=True)
class PublicParams:
    """3*lam bits per committed message bit."""

    bits: tuple
    lam: int

    def __post_init__(self):
        if len(self.bits) % (3 * self.lam):
            raise LengthMismatchError("pp length must be a multiple of 3*lambda")

    @property
    def message_bits(self):
        return len(self.bits) // (3 * self.lam)

    def block(self, i):
        width = 3 * self.lam
        return self.bits[i * width:(i + 1) * width]


def com_setup(lam, message_bits, rng):
    return PublicParams(random_bits(rng, 3 * lam * message_bits), lam)


def stretch(seed_bits, n_bits):
    """G: the PRG keyed by a short seed right-aligned in the 128-bit key."""

    return toy_prg(bits_to_int(seed_bits), n_bits)


def com(pp, m, r):
    """Commit to bits m with randomness r (lam bits per message bit)."""

    lam = pp.lam
    if len(r) != lam * len(m):
        raise LengthMismatchError(f"need {lam * len(m)} random bits, got {len(r)}")
    if pp.message_bits < len(m):
        raise LengthMismatchError("pp too short for this message")
    out = []
    for i, bit in enumerate(m):
        g = stretch(r[i * lam:(i + 1) * lam], 3 * lam)
        out.extend(xor_bits(g, pp.block(i)) if bit else g)
    return tuple(out)

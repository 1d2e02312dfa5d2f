"""ToyCipher: a Simeck-style 64-bit block cipher with a 128-bit key.

Not a secure cipher. It is fixed bit-exactly so the keystream generator, the
encryption scheme and the commitment built on it compile to small boolean
circuits.

    state (a, b), two 32-bit words; 32 rounds
    round i: (a, b) <- (b ^ f(a) ^ k[i % 4] ^ i, a)
    f(a) = (a & rotl(a, 5)) ^ rotl(a, 1)
"""

import os

import numpy as np

ROUNDS = 32
WORD = 32
MASK = 0xFFFFFFFF
BLOCK_BITS = 64

VECTORS_PATH = os.path.join(os.path.dirname(os.path.abspath(__file__)), "vectors", "toycipher.txt")


def rotl(x, r):
    return ((x << r) | (x >> (WORD - r))) & MASK


def key_words(key):
    """Big-endian 32-bit words k0..k3 of a 128-bit integer key."""

    return [(key >> (96 - 32 * i)) & MASK for i in range(4)]


def encrypt_block(key, block):
    """Encrypt one 64-bit block (integers in, integer out)."""

    k = key_words(key)
    a, b = block >> 32, block & MASK
    for i in range(ROUNDS):
        r5 = ((a << 5) | (a >> 27)) & MASK
        r1 = ((a << 1) | (a >> 31)) & MASK
        a, b = b ^ (a & r5) ^ r1 ^ k[i & 3] ^ i, a
    return (a << 32) | b


def toy_prg(key, n_bits):
    """Counter-mode keystream: block j is encrypt_block(key, j), MSB first.

    Returns a tuple of n_bits bits.
    """

    if n_bits < 0:
        raise ValueError("n_bits must be non-negative")
    blocks = -(-n_bits // BLOCK_BITS)
    stream = 0
    for j in range(blocks):
        stream = (stream << BLOCK_BITS) | encrypt_block(key, j)
    total = blocks * BLOCK_BITS
    return tuple((stream >> (total - 1 - i)) & 1 for i in range(n_bits))


def encrypt_blocks(keys, blocks):
    """Vectorised encrypt_block over numpy arrays.

    ``keys`` is a (4, N) uint32 array of key words, ``blocks`` a (2, N) uint32
    array of (a, b) words. Returns a (2, N) uint32 array.
    """

    keys = np.asarray(keys, dtype=np.uint32)
    a = np.array(blocks[0], dtype=np.uint32)
    b = np.array(blocks[1], dtype=np.uint32)
    five, twenty_seven = np.uint32(5), np.uint32(27)
    one, thirty_one = np.uint32(1), np.uint32(31)
    for i in range(ROUNDS):
        r5 = (a << five) | (a >> twenty_seven)
        r1 = (a << one) | (a >> thirty_one)
        a, b = b ^ (a & r5) ^ r1 ^ keys[i & 3] ^ np.uint32(i), a
    return np.stack([a, b])


def prg_table(seed_bits, n_bits):
    """toy_prg output for every seed of seed_bits bits, as an (2**seed_bits, n_bits) uint8 array.

    Seeds are right-aligned in the 128-bit key, so only k3 varies.
    """

    if seed_bits > 32:
        raise ValueError("prg_table enumerates at most 32-bit seeds")
    count = 1 << seed_bits
    keys = np.zeros((4, count), dtype=np.uint32)
    keys[3] = np.arange(count, dtype=np.uint32)
    blocks = -(-n_bits // BLOCK_BITS)
    columns = []
    for j in range(blocks):
        plain = np.zeros((2, count), dtype=np.uint32)
        plain[0] = np.uint32(j >> 32)
        plain[1] = np.uint32(j & MASK)
        out = encrypt_blocks(keys, plain)
        for word in out:
            as_bytes = word.astype(">u4").view(np.uint8).reshape(count, 4)
            columns.append(np.unpackbits(as_bytes, axis=1))
    return np.concatenate(columns, axis=1)[:, :n_bits]


def load_vectors(path=VECTORS_PATH):
    """(key, plaintext, ciphertext) integer triples from a vector file."""

    vectors = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, plain, cipher = (int(field, 16) for field in line.split())
            vectors.append((key, plain, cipher))
    return vectors

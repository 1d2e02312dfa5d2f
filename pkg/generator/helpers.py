"""Straight-line reference ToyCipher for vector generation."""

MASK = 0xFFFFFFFF


def rotl(x, r):
    return ((x << r) | (x >> (32 - r))) & MASK


def reference_encrypt(key_hex, block_hex):
    """Ciphertext hex for a 32-hex-digit key and a 16-hex-digit block."""

    k = [int(key_hex[i:i + 8], 16) for i in range(0, 32, 8)]
    a, b = int(block_hex[:8], 16), int(block_hex[8:], 16)
    for i in range(32):
        a, b = (b ^ (a & rotl(a, 5)) ^ rotl(a, 1) ^ k[i % 4] ^ i) & MASK, a
    return f"{a:08x}{b:08x}"

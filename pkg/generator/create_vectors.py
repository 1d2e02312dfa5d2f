"""Write the ToyCipher known-answer vectors.

The library reads vectors/toycipher.txt in its tests; regenerate it only if
the cipher definition changes. Run from the repository root:

    python generator/create_vectors.py
"""

from helpers import reference_encrypt

VECTORS_PATH = 'vectors/toycipher.txt'

INPUTS = [
    ('00000000000000000000000000000000', '0000000000000000'),
    ('000102030405060708090a0b0c0d0e0f', '0000000000000000'),
    ('000102030405060708090a0b0c0d0e0f', '0000000000000001'),
    ('000102030405060708090a0b0c0d0e0f', '0123456789abcdef'),
    ('ffffffffffffffffffffffffffffffff', 'ffffffffffffffff'),
    ('0f0e0d0c0b0a09080706050403020100', 'fedcba9876543210'),
    ('00000000000000000000000000000001', '0000000000000000'),
]

with open(VECTORS_PATH, 'w') as vectors:
    for key, block in INPUTS:
        vectors.write(f"{key} {block} {reference_encrypt(key, block)}\n")

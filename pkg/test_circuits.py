"""Boolean circuit tests."""

# run these tests like:
#
#    python -m unittest test_circuits.py


import itertools
from unittest import TestCase

import numpy as np

from circuits import (AND, ONE, ZERO, CircuitBuilder, WitnessLengthError,
                      circuit_eval, com_circuit, frame_circuit,
                      toy_cipher_circuit)
from crypto import com, com_setup, enc, gen_key, int_to_bits, random_bits
from toycipher import load_vectors


class BuilderTestCase(TestCase):
    """Gate folding and small combinators."""

    def test_constant_folding(self):
        """Do constants fold without adding gates?"""

        builder = CircuitBuilder()
        (a,) = builder.inputs(1)
        self.assertEqual(builder.xor(a, ZERO), a)
        self.assertEqual(builder.xor(a, a), ZERO)
        self.assertEqual(builder.and_(a, ONE), a)
        self.assertEqual(builder.and_(a, ZERO), ZERO)
        self.assertEqual(builder.gates, [])

    def test_double_negation(self):
        """Does not(not(a)) give back a?"""

        builder = CircuitBuilder()
        (a,) = builder.inputs(1)
        self.assertEqual(builder.not_(builder.not_(a)), a)

    def test_exactly_one(self):
        """Is exactly_one correct on every 3-bit input?"""

        builder = CircuitBuilder()
        wires = builder.inputs(3)
        circuit = builder.build(builder.exactly_one(wires))
        for bits in itertools.product((0, 1), repeat=3):
            self.assertEqual(circuit_eval(circuit, bits), int(sum(bits) == 1))

    def test_equal(self):
        """Does equal compare a word to a constant?"""

        builder = CircuitBuilder()
        wires = builder.inputs(4)
        circuit = builder.build(builder.equal(wires, builder.word(9, 4)))
        self.assertEqual(circuit_eval(circuit, (1, 0, 0, 1)), 1)
        self.assertEqual(circuit_eval(circuit, (1, 0, 1, 1)), 0)

    def test_constant_output(self):
        """Does a constant output get its own gate?"""

        builder = CircuitBuilder()
        builder.inputs(2)
        circuit = builder.build(ONE)
        self.assertEqual(circuit_eval(circuit, (0, 0)), 1)

    def test_witness_length(self):
        """Is a short witness refused?"""

        builder = CircuitBuilder()
        wires = builder.inputs(2)
        circuit = builder.build(builder.and_(*wires))
        self.assertEqual(circuit.n_and, 1)
        with self.assertRaises(WitnessLengthError):
            circuit_eval(circuit, (1,))

    def test_digest(self):
        """Do equal structures share a digest and different ones not?"""

        def build(op):
            builder = CircuitBuilder()
            a, b = builder.inputs(2)
            return builder.build(op(builder)(a, b))

        first = build(lambda b: b.and_)
        self.assertEqual(first.digest(), build(lambda b: b.and_).digest())
        self.assertNotEqual(first.digest(), build(lambda b: b.xor).digest())
        self.assertEqual(first.stats()["AND"], 1)
        self.assertEqual(first.gates[0][0], AND)


class PrimitiveCircuitTestCase(TestCase):
    """Compiled primitives agree with the reference implementations."""

    def test_toy_cipher(self):
        """Does the cipher circuit reproduce a known answer?"""

        key, plain, cipher = load_vectors()[3]
        builder = CircuitBuilder()
        key_wires = builder.inputs(128)
        block_wires = builder.inputs(64)
        out = toy_cipher_circuit(builder, key_wires, block_wires)
        witness = int_to_bits(key, 128) + int_to_bits(plain, 64)
        self.assertEqual(tuple(builder.evaluate(witness, out)), int_to_bits(cipher, 64))

    def test_commitment(self):
        """Does the commitment circuit match com?"""

        rng = np.random.default_rng(11)
        pp = com_setup(4, 2, rng)
        message = (1, 0)
        randomness = random_bits(rng, 8)
        builder = CircuitBuilder()
        m_wires = builder.inputs(2)
        r_wires = builder.inputs(8)
        out = com_circuit(builder, pp, m_wires, r_wires)
        self.assertEqual(tuple(builder.evaluate(message + randomness, out)),
                         com(pp, message, randomness))

    def test_frame(self):
        """Does the decryption circuit recover validity bit and payload?"""

        sk = gen_key(np.random.default_rng(5), 8)
        ct = enc(sk, 3, 42)
        builder = CircuitBuilder()
        sk_wires = builder.inputs(8)
        frame = frame_circuit(builder, sk_wires, 3, ct.body)
        self.assertEqual(tuple(builder.evaluate(sk.bits, frame)), (1,) + int_to_bits(42, 7))

"""Zero-knowledge proof tests."""

# run these tests like:
#
#    python -m unittest test_zk.py


from unittest import TestCase

import numpy as np

from circuits import CircuitBuilder
from zk import (CheatingProver, ZkProof, ZkProver, draw_challenges, soundness_experiment,
                zk_prove, zk_setup, zk_simulate, zk_verify)

DIGEST_BITS = 16
REPS = 6


def small_circuit():
    """(a xor b) and c."""

    builder = CircuitBuilder()
    a, b, c = builder.inputs(3)
    return builder.build(builder.and_(builder.xor(a, b), c))


class ZkTestCase(TestCase):
    """Completeness, simulation and the canonical cheat."""

    def setUp(self):
        self.rng = np.random.default_rng(2024)
        self.pp = zk_setup(self.rng, lam=4, digest_bits=DIGEST_BITS)
        self.circuit = small_circuit()

    def test_honest_proof_verifies(self):
        """Does an honest proof pass for every challenge value?"""

        for e in range(3):
            challenges = (e,) * REPS
            proof = zk_prove(self.circuit, (1, 0, 1), REPS, self.rng, self.pp, challenges, DIGEST_BITS)
            self.assertTrue(zk_verify(self.circuit, proof, challenges, self.pp, DIGEST_BITS))

    def test_proof_bytes(self):
        """Does a proof still verify after its binary form?"""

        challenges = draw_challenges(self.rng, REPS)
        proof = zk_prove(self.circuit, (0, 1, 1), REPS, self.rng, self.pp, challenges, DIGEST_BITS)
        decoded = ZkProof.from_bytes(proof.to_bytes())
        self.assertTrue(zk_verify(self.circuit, decoded, challenges, self.pp, DIGEST_BITS))

    def test_wrong_challenges(self):
        """Is a proof answering other challenges rejected?"""

        proof = zk_prove(self.circuit, (1, 0, 1), REPS, self.rng, self.pp, (0,) * REPS, DIGEST_BITS)
        self.assertFalse(zk_verify(self.circuit, proof, (1,) * REPS, self.pp, DIGEST_BITS))

    def test_tampered_output_share(self):
        """Does flipping a published output share break verification?"""

        challenges = (2,) * REPS
        proof = zk_prove(self.circuit, (1, 0, 1), REPS, self.rng, self.pp, challenges, DIGEST_BITS)
        rep = proof.repetitions[0]
        shares = list(rep.output_shares)
        shares[2] ^= 1
        proof.repetitions[0] = type(rep)(rep.commitments, tuple(shares), rep.challenge, rep.opened)
        self.assertFalse(zk_verify(self.circuit, proof, challenges, self.pp, DIGEST_BITS))

    def test_unsatisfying_witness(self):
        """Does an honest prover refuse a witness that evaluates to 0?"""

        with self.assertRaises(ValueError):
            ZkProver(self.circuit, (1, 1, 1), REPS, self.rng, self.pp, DIGEST_BITS)

    def test_simulator(self):
        """Does a simulated transcript verify for its challenges?"""

        challenges = draw_challenges(self.rng, REPS)
        proof = zk_simulate(self.circuit, REPS, challenges, self.rng, self.pp, DIGEST_BITS)
        self.assertTrue(zk_verify(self.circuit, proof, challenges, self.pp, DIGEST_BITS))

    def test_cheat_survives_unless_recomputed(self):
        """Does the cheat pass exactly when no corrupted party is recomputed?"""

        cheater = CheatingProver(self.circuit, (1, 1, 1), REPS, self.rng, self.pp, DIGEST_BITS)
        dodge = tuple((c + 1) % 3 for c in cheater.corrupted)
        self.assertTrue(zk_verify(self.circuit, cheater.respond(dodge), dodge, self.pp, DIGEST_BITS))
        caught = tuple(cheater.corrupted)
        self.assertFalse(zk_verify(self.circuit, cheater.respond(caught), caught, self.pp, DIGEST_BITS))

    def test_soundness_experiment(self):
        """Is a one-repetition cheat accepted sometimes but not always?"""

        accepted, total = soundness_experiment(self.circuit, (1, 1, 1), 1, 20, 10, self.rng,
                                               self.pp, DIGEST_BITS)
        self.assertEqual(total, 200)
        self.assertTrue(0 < accepted < total)

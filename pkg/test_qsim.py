"""Quantum arena tests."""

# run these tests like:
#
#    python -m unittest test_qsim.py


from unittest import TestCase

import numpy as np

from qsim import QArena, QuantumBudgetError, QubitConsumedError

SEEDS = range(20)


class QArenaTestCase(TestCase):
    """BB84 states, EPR pairs and teleportation."""

    def test_bb84_in_own_basis(self):
        """Does measuring in the preparation basis always return the bit?"""

        for seed in SEEDS:
            arena = QArena(np.random.default_rng(seed))
            for b in (0, 1):
                for theta in (0, 1):
                    q = arena.prepare_bb84(b, theta)
                    self.assertEqual(arena.measure(q, theta), b)

    def test_bb84_in_other_basis_is_random(self):
        """Does the conjugate basis give both outcomes?"""

        arena = QArena(np.random.default_rng(1))
        outcomes = {arena.measure(arena.prepare_bb84(0, 1), 0) for _ in range(64)}
        self.assertEqual(outcomes, {0, 1})

    def test_state_vector(self):
        """Is H|1> stored as (|0> - |1>)/sqrt(2)?"""

        arena = QArena()
        q = arena.prepare_bb84(1, 1)
        amplitudes, order = arena.state_of(q)
        np.testing.assert_allclose(amplitudes, np.array([1, -1]) / np.sqrt(2))
        self.assertEqual(order, [q])

    def test_epr_correlations(self):
        """Do both halves of a pair agree in either basis?"""

        for seed in SEEDS:
            arena = QArena(np.random.default_rng(seed))
            for basis in (0, 1):
                a, b = arena.make_epr()
                self.assertEqual(arena.measure(a, basis), arena.measure(b, basis))
            self.assertEqual(arena.epr_pairs, 2)

    def test_measure_consumes(self):
        """Is a measured handle dead?"""

        arena = QArena()
        q = arena.prepare_bb84(0, 0)
        arena.measure(q, 0)
        self.assertFalse(arena.is_live(q))
        self.assertEqual(arena.live_count, 0)
        with self.assertRaises(QubitConsumedError):
            arena.measure(q, 0)

    def test_teleportation(self):
        """Do the Bell outcomes correct the partner qubit to the sent state?"""

        for seed in SEEDS:
            arena = QArena(np.random.default_rng(seed))
            for b in (0, 1):
                for theta in (0, 1):
                    q = arena.prepare_bb84(b, theta)
                    near, far = arena.make_epr()
                    x, z = arena.bell_measure(q, near)
                    arena.apply_pauli(far, x, z)
                    self.assertEqual(arena.measure(far, theta), b)
            self.assertEqual(arena.live_count, 0)

    def test_teleport_without_correction(self):
        """Is the uncorrected bit recovered as m xor x or m xor z?"""

        for seed in SEEDS:
            arena = QArena(np.random.default_rng(seed))
            for b in (0, 1):
                q = arena.prepare_bb84(b, 0)
                near, far = arena.make_epr()
                x, z = arena.bell_measure(q, near)
                self.assertEqual(arena.measure(far, 0) ^ x, b)

                q = arena.prepare_bb84(b, 1)
                near, far = arena.make_epr()
                x, z = arena.bell_measure(q, near)
                self.assertEqual(arena.measure(far, 1) ^ z, b)

    def test_live_budget(self):
        """Is the live-qubit budget enforced?"""

        arena = QArena(max_live=1)
        arena.prepare_bb84(0, 0)
        with self.assertRaises(QuantumBudgetError):
            arena.make_epr()

    def test_register_budget(self):
        """Is an oversized entangled register refused?"""

        arena = QArena(max_qubits=2)
        q = arena.prepare_bb84(0, 0)
        near, _ = arena.make_epr()
        with self.assertRaises(QuantumBudgetError):
            arena.bell_measure(q, near)

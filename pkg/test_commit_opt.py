"""Optimized commitment tests."""

# run these tests like:
#
#    python -m unittest test_commit_opt.py


import csv
import os
import tempfile
from fractions import Fraction
from unittest import TestCase

from commit import RevealRequest
from commit_opt import (OptGeometry, OptParams, TickSchedule, mesh_points, per_tick_work_profile,
                        reveal_optimized, run_optimized_commit, write_profile_csv)
from spacetime import GeometryError, SpacetimePoint, in_convex_hull, to_fixed

VERIFIERS = ((0,), (6,))
PARAMS = OptParams(n=4, kappa=8, lam=8)


def line_geometry(ticks=10, delta=1):
    return OptGeometry(VERIFIERS, TickSchedule.from_ticks(ticks, delta))


class TickScheduleTestCase(TestCase):
    """Tick arithmetic."""

    def test_from_ticks(self):
        """Does the window end on the last tick?"""

        schedule = TickSchedule.from_ticks(5, Fraction(1, 2), 1)
        self.assertEqual(schedule.t_end, 3)
        self.assertEqual(schedule.count, 5)
        self.assertEqual(schedule.tick_time(2), to_fixed(2))

    def test_lookup(self):
        """Are times mapped to the enclosing and the next tick?"""

        schedule = TickSchedule.from_ticks(10, 1)
        self.assertEqual(schedule.tick_at(to_fixed(Fraction(5, 2))), 2)
        self.assertEqual(schedule.tick_at(to_fixed(3)), 3)
        self.assertEqual(schedule.first_tick_from(to_fixed(Fraction(5, 2))), 3)
        self.assertEqual(schedule.first_tick_from(to_fixed(3)), 3)

    def test_invalid(self):
        """Are a zero interval and a ragged window refused?"""

        with self.assertRaises(ValueError):
            TickSchedule(0, 0, 1)
        with self.assertRaises(ValueError):
            TickSchedule(1, 0, Fraction(1, 2))


class MeshTestCase(TestCase):
    """Mesh enumeration."""

    def test_line_count(self):
        """Do ten unit ticks on [0, 6] give one point per tick pair at most six apart?"""

        mesh = mesh_points(VERIFIERS, TickSchedule.from_ticks(10, 1))
        self.assertEqual(len(mesh), 13 * 10 - 42)
        self.assertTrue(all(in_convex_hull(m.L, VERIFIERS) for m in mesh))
        self.assertEqual([m.id for m in mesh], list(range(len(mesh))))

    def test_density(self):
        """Does halving the interval at least double the mesh?"""

        coarse = mesh_points(VERIFIERS, TickSchedule(1, 0, 9))
        fine = mesh_points(VERIFIERS, TickSchedule(Fraction(1, 2), 0, 9))
        self.assertGreaterEqual(len(fine), 2 * len(coarse))

    def test_degenerate(self):
        """Are coincident verifiers refused?"""

        with self.assertRaises(GeometryError):
            mesh_points(((0,), (0,)), TickSchedule.from_ticks(3, 1))

    def test_locate(self):
        """Does locate find a mesh point and miss an off-mesh one?"""

        geometry = line_geometry()
        m = geometry.mesh[17]
        self.assertEqual(geometry.locate(m.point), 17)
        self.assertIsNone(geometry.locate(SpacetimePoint((Fraction(1, 3),), Fraction(31, 7))))


class OptimizedRunTestCase(TestCase):
    """Commit and reveal on the mesh."""

    @classmethod
    def setUpClass(cls):
        cls.geometry = line_geometry()
        cls.mesh_id = len(cls.geometry) // 2
        cls.commit_run = run_optimized_commit(cls.geometry, cls.mesh_id, seed=6, params=PARAMS)

    def test_honest_reveal(self):
        """Does the occupied mesh point open?"""

        result = reveal_optimized(self.commit_run.rho, RevealRequest(self.mesh_id, self.commit_run.opening),
                                  self.geometry, PARAMS)
        self.assertTrue(result.accepted)
        self.assertEqual(result.accepting, frozenset({self.mesh_id}))

    def test_other_point(self):
        """Is a different mesh point rejected?"""

        result = reveal_optimized(self.commit_run.rho, RevealRequest(self.mesh_id + 1, self.commit_run.opening),
                                  self.geometry, PARAMS)
        self.assertFalse(result.accepted)

    def test_lockstep_shape(self):
        """Do provers at two mesh points leave transcripts of the same shape?"""

        other = run_optimized_commit(self.geometry, 3, seed=6, params=PARAMS)
        self.assertEqual(other.rho.shape(), self.commit_run.rho.shape())

    def test_quantum_target(self):
        """Does the quantum variant open at its mesh point?"""

        run = run_optimized_commit(self.geometry, self.mesh_id, seed=7, params=PARAMS, quantum=True)
        result = reveal_optimized(run.rho, RevealRequest(self.mesh_id, run.opening), self.geometry,
                                  PARAMS, run.quantum_target)
        self.assertTrue(result.accepted)

    def test_off_mesh(self):
        """Does a prover off the mesh open nothing?"""

        point = SpacetimePoint((Fraction(1, 3),), Fraction(31, 7))
        run = run_optimized_commit(self.geometry, point, seed=8, params=PARAMS)
        self.assertIsNone(run.mesh_id)
        result = reveal_optimized(run.rho, RevealRequest(0, run.opening), self.geometry, PARAMS)
        self.assertFalse(result.accepted)
        self.assertEqual(result.accepting, frozenset())

    def test_work_profile(self):
        """Are per-tick encryptions and challenges bounded by the verifier count?"""

        profile = per_tick_work_profile(self.commit_run)
        self.assertLessEqual(profile.max_per_tick("prover", "enc"), 2)
        self.assertEqual(profile.max_per_tick("verifier", "prg"), 2)

    def test_work_independent_of_window(self):
        """Does a larger mesh leave the prover's per-tick encryptions unchanged?"""

        small = per_tick_work_profile(run_optimized_commit(line_geometry(6), 0, seed=1, params=PARAMS))
        large = per_tick_work_profile(run_optimized_commit(line_geometry(18), 0, seed=1, params=PARAMS))
        self.assertEqual(small.max_per_tick("prover", "enc"), large.max_per_tick("prover", "enc"))

    def test_profile_csv(self):
        """Does the profile CSV carry one row per tick and party?"""

        profile = per_tick_work_profile(self.commit_run)
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "profile.csv")
            write_profile_csv(profile, path)
            with open(path) as fh:
                rows = list(csv.DictReader(fh))
        self.assertEqual(len(rows), len(profile.table()))
        self.assertEqual(set(rows[0]), {"tick", "party", "ops"})

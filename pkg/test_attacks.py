"""Attack harness tests."""

# run these tests like:
#
#    python -m unittest test_attacks.py


from dataclasses import replace
from fractions import Fraction
from unittest import TestCase

from attacks import (DEFAULT_SPOOFERS, DEFAULT_TARGET, DEFAULT_VERIFIERS, AttackReport,
                     ClassicalVariant, CopySpoofer, StraddleError, UnknownStrategyError,
                     binding_attack_suite, causality_clean, check_straddle,
                     classical_copy_attack, default_committable_set, denial_privacy_attack,
                     epr_attack_plain_bb84, equivocations, intercept_resend_attack, run_attack,
                     spoofer_factory, straddle_positions, trial_seeds)
from commit import CommitParams, commit_phase
from crypto import PublicParams, bits_to_int, com, int_to_bits, stretch, xor_bits
from pv import PvInstance, run_singleton_pv
from spacetime import SpacetimePoint


def line_instance(r=1, n=8):
    return PvInstance(DEFAULT_VERIFIERS, DEFAULT_TARGET, n=n, r=r)


class ReportTestCase(TestCase):
    """Reports and seeds."""

    def test_report(self):
        """Does the report carry the rate and a Wilson interval?"""

        out = AttackReport("x", 4, 3, {"note": 1}).to_dict()
        self.assertEqual(out["rate"], 0.75)
        self.assertEqual(len(out["ci95"]), 2)
        self.assertEqual(out["note"], 1)
        self.assertEqual(AttackReport("x", 0, 0).rate, 0.0)

    def test_trial_seeds(self):
        """Are trial seeds reproducible?"""

        self.assertEqual(trial_seeds(3, 5), trial_seeds(3, 5))
        self.assertEqual(len(set(trial_seeds(3, 5))), 5)


class PlacementTestCase(TestCase):
    """Straddle checks."""

    def test_spoofer_at_target(self):
        """Is a member at the target refused?"""

        with self.assertRaises(StraddleError):
            check_straddle(line_instance(), [(1,), (3,)])

    def test_plane(self):
        """Are straddles refused off the line?"""

        inst = PvInstance(((0, 0), (12, 0), (0, 12)), SpacetimePoint((2, 2), 20))
        with self.assertRaises(StraddleError):
            check_straddle(inst, [(1, 1)])

    def test_midpoints(self):
        """Do commitment coalitions sit halfway to the claimed point?"""

        geometry = default_committable_set()
        self.assertEqual(straddle_positions(geometry, 1), ((Fraction(3, 2),), (Fraction(9, 2),)))


class PositionVerificationAttackTestCase(TestCase):
    """Coalitions against singleton verification."""

    def test_classical_copy_always_wins(self):
        """Do two copying spoofers always pass the classical variant?"""

        report = classical_copy_attack(line_instance(), trials=5, seed=1)
        self.assertEqual(report.successes, 5)

    def test_copy_run_is_causal(self):
        """Does the copy attack stay within light-speed signalling?"""

        inst = line_instance()
        result = run_singleton_pv(inst, spoofer_factory(CopySpoofer, DEFAULT_SPOOFERS), 2,
                                  ClassicalVariant(inst.n))
        self.assertTrue(result.accepted)
        self.assertTrue(causality_clean(result.sim))

    def test_intercept_resend_tally(self):
        """Does intercept-resend lose some rounds of f-BB84?"""

        report = intercept_resend_attack(line_instance(), trials=40, seed=2)
        self.assertEqual(report.extra["rounds"], 40)
        self.assertLess(report.extra["round_rate"], 1.0)
        self.assertGreater(report.extra["round_rate"], 0.0)

    def test_epr_attack_breaks_plain_bb84(self):
        """Does one EPR pair per round always break plain BB84?"""

        report = epr_attack_plain_bb84(trials=5, seed=3)
        self.assertEqual(report.name, "epr-plain-bb84")
        self.assertEqual(report.successes, 5)

    def test_registry(self):
        """Do registered attacks run and unknown ones raise?"""

        self.assertEqual(run_attack("classical-copy", 3, seed=4).successes, 3)
        self.assertEqual(run_attack("single-spoofer", 2, seed=4).successes, 0)
        with self.assertRaises(UnknownStrategyError):
            run_attack("nonsense", 1)


class CommitmentAttackTestCase(TestCase):
    """Binding and privacy experiments."""

    def test_honest_binding_row(self):
        """Does an honest prover open only its own point?"""

        table = binding_attack_suite(strategies=("honest",), trials=2, seed=5)
        self.assertEqual(table["honest"]["success"], [2, 0, 0])

    def test_equivocation_work(self):
        """Does the equivocation search try every seed of every bit?"""

        table = binding_attack_suite(strategies=("equivocation",), trials=1, seed=6)
        self.assertEqual(table["equivocation"]["tries"], 8 * 256)
        self.assertEqual(table["equivocation"]["radius"], 2)

    def test_intercept_resend_commit_shape(self):
        """Does the coalition experiment report one count per point?"""

        table = binding_attack_suite(strategies=("intercept-resend",), trials=2, seed=7)
        self.assertEqual(len(table["intercept-resend"]["success"]), 3)
        self.assertEqual(table["intercept-resend"]["success"][0], 0)

    def test_unknown_strategy(self):
        """Is an unknown binding strategy refused?"""

        with self.assertRaises(UnknownStrategyError):
            binding_attack_suite(strategies=("guess",), trials=1)

    def test_equivocation_work_bound(self):
        """Is a seed space above the work bound refused?"""

        params = CommitParams(n=4, kappa=8, lam=8)
        run = commit_phase(default_committable_set(), params, 1, prover_alpha=0)
        with self.assertRaises(ValueError):
            equivocations(run.rho, run.opening, params, work=100)

    def test_equivocation_radius(self):
        """Are two flippable bits found alone at radius 1 and together at radius 2?"""

        params = CommitParams(n=4, kappa=8, lam=4)
        run = commit_phase(default_committable_set(), params, 1, prover_alpha=0)
        lam, sk, r = params.lam, run.opening.sk.bits, run.opening.r
        blocks = list(run.rho.pp.bits)
        for i in (0, 1):
            own = r[i * lam:(i + 1) * lam]
            other = int_to_bits(bits_to_int(own) ^ 1, lam)
            blocks[i * 3 * lam:(i + 1) * 3 * lam] = xor_bits(stretch(own, 3 * lam), stretch(other, 3 * lam))
        pp = PublicParams(tuple(blocks), lam)
        rho = replace(run.rho, pp=pp, c=com(pp, sk, r))

        def flipped(o):
            return frozenset(i for i, (a, b) in enumerate(zip(o.sk.bits, sk)) if a != b)

        near, tried = equivocations(rho, run.opening, params, radius=1)
        self.assertEqual(tried, 8 * 16)
        self.assertTrue({frozenset({0}), frozenset({1})} <= {flipped(o) for o in near})
        self.assertTrue(all(len(flipped(o)) == 1 for o in near))
        far, _ = equivocations(rho, run.opening, params, radius=2)
        self.assertIn(frozenset({0, 1}), {flipped(o) for o in far})
        self.assertTrue(all(com(pp, o.sk.bits, o.r) == rho.c for o in far))
        with self.assertRaises(ValueError):
            equivocations(rho, run.opening, params, radius=0)

    def test_denial_privacy(self):
        """Does the verdict reveal whether the prover is in the denied zone?"""

        report = denial_privacy_attack(default_committable_set(), {0}, trials=3, seed=8)
        self.assertEqual(report.successes, 3)
        self.assertEqual(report.extra["zone"], [0])

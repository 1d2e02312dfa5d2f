"""Statistics tests."""

# run these tests like:
#
#    python -m unittest test_stats.py


from unittest import TestCase

import numpy as np

from stats import (CheckResult, bonferroni, chi2_df1_pvalue, frequency_test, homogeneity_test,
                   runs_test, wilson_interval)


class StatsTestCase(TestCase):
    """Intervals and bit tests."""

    def test_wilson(self):
        """Is the interval inside [0, 1] and around the estimate?"""

        low, high = wilson_interval(50, 100)
        self.assertLess(low, 0.5)
        self.assertGreater(high, 0.5)
        self.assertAlmostEqual(low + high, 1.0)
        self.assertAlmostEqual(low, 0.4038, places=3)
        self.assertEqual(wilson_interval(0, 0), (0.0, 1.0))
        self.assertEqual(wilson_interval(0, 10)[0], 0.0)

    def test_chi2(self):
        """Does the chi^2 tail match known values?"""

        self.assertAlmostEqual(chi2_df1_pvalue(0), 1.0)
        self.assertAlmostEqual(chi2_df1_pvalue(3.841458820694124), 0.05, places=6)

    def test_frequency(self):
        """Is a balanced sample accepted and a constant one not?"""

        self.assertAlmostEqual(frequency_test([0, 1] * 50), 1.0)
        self.assertAlmostEqual(frequency_test([1, 0, 1, 1, 0, 1, 0, 1, 0, 1]), 0.527089, places=6)
        self.assertLess(frequency_test([1] * 100), 1e-6)
        with self.assertRaises(ValueError):
            frequency_test([])

    def test_runs(self):
        """Does the runs test flag alternating bits and pass random ones?"""

        self.assertAlmostEqual(runs_test([1, 0, 0, 1, 1, 0, 1, 0, 1, 1]), 0.147232, places=6)
        self.assertLess(runs_test([0, 1] * 500), 1e-6)
        bits = np.random.default_rng(0).integers(0, 2, 4000)
        self.assertGreater(runs_test(bits), 1e-4)

    def test_homogeneity(self):
        """Do equal samples agree and opposite samples differ?"""

        self.assertAlmostEqual(homogeneity_test(50, 100, 50, 100), 1.0)
        self.assertLess(homogeneity_test(90, 100, 10, 100), 1e-6)
        self.assertEqual(homogeneity_test(0, 10, 0, 10), 1.0)

    def test_bonferroni(self):
        """Is the threshold divided by the number of tests?"""

        marked = bonferroni([CheckResult("a", 0.004), CheckResult("b", 0.5)], alpha=0.01)
        self.assertEqual([r.passed for r in marked], [False, True])

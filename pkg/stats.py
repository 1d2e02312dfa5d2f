"""Test statistics for the acceptance experiments and the view distinguisher."""

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats as sp_stats


@dataclass(frozen=True)
class CheckResult:
    name: str
    p_value: float
    passed: bool = True

    def to_dict(self):
        return {"name": self.name, "p_value": self.p_value, "passed": self.passed}


def wilson_interval(successes, trials, confidence=0.95):
    """Wilson score interval for a binomial proportion."""

    if trials <= 0:
        return (0.0, 1.0)
    ci = sp_stats.binomtest(int(successes), int(trials)).proportion_ci(
        confidence_level=confidence, method="wilson"
    )
    low = 0.0 if successes == 0 else max(0.0, float(ci.low))
    high = 1.0 if successes == trials else min(1.0, float(ci.high))
    return (low, high)


def chi2_df1_pvalue(statistic):
    """Upper tail of the chi-squared distribution with one degree of freedom."""

    return float(sp_stats.chi2.sf(max(statistic, 0.0), 1))


def frequency_test(bits):
    """Monobit test: chi^2 of the ones and zeros counts against n/2 each."""

    bits = np.asarray(bits, dtype=np.int64)
    n = bits.size
    if n == 0:
        raise ValueError("no bits to test")
    ones = int(np.count_nonzero(bits))
    return float(sp_stats.chisquare([ones, n - ones]).pvalue)


def runs_test(bits):
    """Wald-Wolfowitz style runs test on a bit sequence."""

    bits = np.asarray(bits, dtype=np.int64)
    n = bits.size
    if n < 2:
        raise ValueError("the runs test needs at least two bits")
    pi = float(np.mean(bits))
    # too unbalanced for the runs count to mean anything
    if abs(pi - 0.5) >= 2 / math.sqrt(n):
        return 0.0
    runs = 1 + int(np.count_nonzero(bits[1:] != bits[:-1]))
    z = (runs - 2 * n * pi * (1 - pi)) / (2 * math.sqrt(n) * pi * (1 - pi))
    return float(2 * sp_stats.norm.sf(abs(z)))


def homogeneity_test(ones_a, n_a, ones_b, n_b):
    """2x2 chi^2 test that two bit samples share one ones-probability."""

    ones = ones_a + ones_b
    if min(n_a, n_b) == 0 or ones in (0, n_a + n_b):
        return 1.0
    table = [[ones_a, n_a - ones_a], [ones_b, n_b - ones_b]]
    return float(sp_stats.chi2_contingency(table, correction=False).pvalue)


def bonferroni(results, alpha=0.01):
    """Mark each result against alpha divided by the number of tests."""

    threshold = alpha / max(len(results), 1)
    return [CheckResult(r.name, r.p_value, r.p_value >= threshold) for r in results]

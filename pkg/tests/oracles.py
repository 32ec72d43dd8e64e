"""Independent reference computations used by the test suite.

Deliberately naive: direct formulas, high-precision arithmetic, exhaustive
enumeration.  Nothing here imports the code under test except plain data types.
"""

import itertools
import math

import mpmath

mpmath.mp.dps = 60


def gaussian_posterior_factual(priors, means, variances, x):
    """P(factual | x) from the two unnormalised densities in 60-digit arithmetic."""
    joint = []
    for c in range(2):
        d = mpmath.mpf(priors[c])
        for xi, m, v in zip(x, means[c], variances[c]):
            m, v, xi = mpmath.mpf(m), mpmath.mpf(v), mpmath.mpf(xi)
            d *= mpmath.exp(-((xi - m) ** 2) / (2 * v)) / mpmath.sqrt(2 * mpmath.pi * v)
        joint.append(d)
    return joint[0] / (joint[0] + joint[1])


def mann_whitney_auc(scores, labels):
    pos = [s for s, y in zip(scores, labels) if y == 1]
    neg = [s for s, y in zip(scores, labels) if y == 0]
    wins = 0.0
    for p, n in itertools.product(pos, neg):
        wins += 1.0 if p > n else 0.5 if p == n else 0.0
    return wins / (len(pos) * len(neg))


def accuracy_at(scores, labels, t):
    return sum((s >= t) == (y == 1) for s, y in zip(scores, labels)) / len(scores)


def best_accuracy_brute_force(scores, labels):
    """Max accuracy over every threshold that can change a prediction."""
    cands = {-math.inf, math.inf}
    for a in scores:
        for b in scores:
            cands.add((a + b) / 2.0)
    return max(accuracy_at(scores, labels, t) for t in cands)


def pearson(a, b):
    n = len(a)
    ma, mb = sum(a) / n, sum(b) / n
    cov = sum((x - ma) * (y - mb) for x, y in zip(a, b))
    va = sum((x - ma) ** 2 for x in a)
    vb = sum((y - mb) ** 2 for y in b)
    return cov / math.sqrt(va * vb)

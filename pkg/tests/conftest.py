import itertools

import numpy as np
import pytest

from dcrep.gaussian import CovarianceSpec


def brute_force_partitions(n):
    """Independent oracle: canonicalized label assignments, deduplicated."""
    seen = set()
    for labels in itertools.product(range(n), repeat=n):
        blocks = {}
        for i, lab in enumerate(labels, start=1):
            blocks.setdefault(lab, []).append(i)
        seen.add(frozenset(frozenset(b) for b in blocks.values()))
    return seen


def random_standard_pd(rng, n, jitter=0.3):
    """Random unit-diagonal PD matrix from a factor model."""
    while True:
        g = rng.normal(size=(n, n + 2))
        a = g @ g.T + jitter * np.eye(n)
        d = np.sqrt(np.diag(a))
        a = a / np.outer(d, d)
        if np.max(np.abs(a - np.eye(n)) * (1 - np.eye(n))) < 0.999:
            try:
                return CovarianceSpec(a)
            except ValueError:
                continue


def random_inverse_stieltjes(rng, n, standardize=False):
    """Random PD inverse-Stieltjes matrix with weak Savage and positive entries.

    Built as the inverse of an irreducible M-matrix with nonnegative row sums,
    which gives 1'A^{-1} = row sums of B >= 0 and A = B^{-1} > 0 entrywise.
    """
    while True:
        w = rng.uniform(0.05, 1.0, size=(n, n))
        w = 0.5 * (w + w.T)
        np.fill_diagonal(w, 0.0)
        sigma = rng.uniform(0.0, 0.5, size=n)
        sigma[rng.integers(n)] += 0.5  # at least one strictly positive row sum
        b = np.diag(sigma + w.sum(axis=1)) - w
        a = np.linalg.inv(b)
        a = 0.5 * (a + a.T)
        if standardize:
            d = np.sqrt(np.diag(a))
            a = a / np.outer(d, d)
        if np.min(np.linalg.eigvalsh(a)) > 1e-10 and np.min(a) > 0:
            return CovarianceSpec(a)


def random_probability_q(rng, n):
    from dcrep.partitions import PartitionDistribution, bell_number

    w = rng.dirichlet(np.ones(bell_number(n)))
    return PartitionDistribution.from_vector(n, w)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)

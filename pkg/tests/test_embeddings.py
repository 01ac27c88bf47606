import math

import numpy as np
import pytest
from scipy import stats

from dcrep.embeddings import (EmbeddingBatch, EmbeddingSample,
                              ou_partition_batch, ou_partition_sample,
                              ou_star_partition_batch, stable_chain_partition_batch,
                              stable_chain_partition_sample,
                              stable_star_partition_batch, verify_color_property)
from dcrep.gaussian import markov_chain_cov, pair_cluster_weight, zero_threshold_law_3
from dcrep.partitions import BinaryLaw, Partition
from dcrep.stable import common_shock_model, sample_sym_stable, stable_threshold_law_mc


def test_single_sample_shape():
    s = ou_partition_sample(0.5, 4, seed=0)
    assert len(s.signs) == 4
    assert s.partition.n == 4
    assert len(s.crossing_probs) == 3
    assert all(v in (-1, 1) for v in s.signs)


def test_blocks_are_intervals_and_signs_constant():
    batch = ou_partition_batch(0.3, 5, 2000, seed=1)
    for i in range(0, 2000, 97):
        s = batch.sample(i)  # validation inside EmbeddingSample
        assert s.topology == "path"


def test_pair_cluster_frequency_matches_pair_weight():
    a, m = 0.5, 100_000
    batch = ou_partition_batch(a, 3, m, seed=2)
    expect = pair_cluster_weight(a)
    for i, j in [(1, 2), (2, 3)]:
        freq = batch.pair_cluster_frequency(i, j)
        se = math.sqrt(expect * (1 - expect) / m)
        assert abs(freq - expect) <= 3 * se


def test_high_correlation_one_block():
    # pair weight 1 - 2 arccos(0.99)/pi = 0.9099...: nearly always one block
    batch = ou_partition_batch(0.99, 2, 50_000, seed=3)
    one_block = np.mean(batch.labels.max(axis=1) == 0)
    assert one_block > 0.9


def test_sign_marginals_fair():
    batch = ou_partition_batch(0.6, 4, 100_000, seed=4)
    p = (batch.signs > 0).mean(axis=0)
    assert np.all(np.abs(p - 0.5) <= 3 * math.sqrt(0.25 / batch.m))


def test_ou_sign_law_matches_markov_exact():
    a, m = 0.5, 100_000
    batch = ou_partition_batch(a, 3, m, seed=5)
    law = batch.empirical_sign_law()
    exact = zero_threshold_law_3(markov_chain_cov(3, a))
    counts = law.probs * m
    chi2 = float(np.sum((counts - m * exact.probs) ** 2 / (m * exact.probs)))
    assert stats.chi2.sf(chi2, 7) >= 1e-3


def test_ou_color_property_verification():
    batch = ou_partition_batch(0.5, 3, 100_000, seed=6)
    report = verify_color_property(batch)
    assert report.passed
    assert report.aggregate_max_dev_se <= 4.0
    # path topology never produces the non-interval partition
    assert all(b.key != "13|2" for b in report.bins)


def test_verification_negative_control():
    batch = ou_partition_batch(0.5, 3, 50_000, seed=7)
    signs = batch.signs.copy()
    # tamper: force the second block's color to copy block one
    for i in range(batch.m):
        lab = batch.labels[i]
        if lab.max() >= 1:
            first = int(np.nonzero(lab == 0)[0][0])
            signs[i, lab == 1] = signs[i, first]
    tampered = EmbeddingBatch(signs, batch.labels, batch.crossing_probs)
    report = verify_color_property(tampered)
    assert not report.passed


def test_verification_on_sample_list_and_n1():
    batch = ou_partition_batch(0.5, 1, 12_000, seed=8)
    report = verify_color_property(batch)
    assert report.passed
    samples = list(ou_partition_batch(0.4, 2, 12_000, seed=9))
    report = verify_color_property(samples)
    assert report.passed
    with pytest.raises(ValueError):
        verify_color_property(ou_partition_batch(0.5, 2, 100, seed=10))


def test_stable_chain_marginal_law():
    alpha, a, m = 1.0, 0.5, 100_000
    batch = stable_chain_partition_batch(alpha, a, 3, m, seed=11)
    # signs are fair and the law is symmetric
    p = (batch.signs > 0).mean(axis=0)
    assert np.all(np.abs(p - 0.5) <= 3 * math.sqrt(0.25 / m))
    law = batch.empirical_sign_law()
    assert law.is_zero_one_symmetric(4 * float(np.max(law.stderr)))


def test_stable_chain_cross_estimator_agreement():
    alpha, a, m = 1.0, 0.5, 100_000
    batch = stable_chain_partition_batch(alpha, a, 3, m, seed=12)
    law = batch.empirical_sign_law()
    from dcrep.stable import stable_markov_model
    mc = stable_threshold_law_mc(stable_markov_model(a, alpha), 0.0, m, seed=13)
    se = np.sqrt(law.stderr ** 2 + mc.stderr ** 2)
    assert np.all(np.abs(law.probs - mc.probs) <= 4 * se)


def test_stable_chain_color_property():
    batch = stable_chain_partition_batch(0.8, 0.4, 3, 100_000, seed=14)
    report = verify_color_property(batch)
    assert report.passed


def test_stable_pair_cluster_monotone_in_gap():
    batch = stable_chain_partition_batch(1.2, 0.6, 4, 50_000, seed=15)
    freqs = [batch.pair_cluster_frequency(1, j) for j in (2, 3, 4)]
    assert freqs[0] >= freqs[1] >= freqs[2]  # containment makes this samplewise


def test_ou_star_matches_common_shock_structure():
    # leaves of the Gaussian star have pairwise correlation a^2
    a, m = 0.6, 100_000
    batch = ou_star_partition_batch(a, 2, m, seed=16)
    law = batch.empirical_sign_law().marginalize([2, 3])
    expect = 0.25 + math.asin(a * a) / (2 * math.pi)  # Sheppard at rho = a^2
    assert abs(law.cell("11") - expect) <= 4 * math.sqrt(expect * (1 - expect) / m)


def test_stable_star_leaves_match_common_shock_mc():
    alpha, a, m = 0.8, 0.4, 100_000
    batch = stable_star_partition_batch(alpha, a, 3, m, seed=17)
    bits = (batch.signs[:, 1:] > 0).astype(np.int64)
    counts = np.bincount(bits @ np.array([4, 2, 1]), minlength=8)
    law = BinaryLaw.from_counts(counts, m)
    mc = stable_threshold_law_mc(common_shock_model(a, alpha), 0.0, m, seed=18)
    se = np.sqrt(law.stderr ** 2 + mc.stderr ** 2)
    assert np.all(np.abs(law.probs - mc.probs) <= 4 * se)


def test_star_color_property():
    batch = stable_star_partition_batch(1.1, 0.5, 3, 60_000, seed=19)
    report = verify_color_property(batch)
    assert report.passed
    assert batch.topology == "star"


def test_embedding_sample_invariants():
    with pytest.raises(ValueError):
        EmbeddingSample(signs=(1, -1), partition=Partition.of([[1, 2]]),
                        crossing_probs=(0.5,))
    with pytest.raises(ValueError):
        EmbeddingSample(signs=(1, -1, 1), partition=Partition.of([[1, 3], [2]]),
                        crossing_probs=(1.0, 1.0))  # non-interval block on a path
    EmbeddingSample(signs=(1, -1, 1), partition=Partition.of([[1, 3], [2]]),
                    crossing_probs=(1.0, 1.0), topology="star")


def test_determinism_in_seed():
    b1 = ou_partition_batch(0.5, 3, 500, seed=42)
    b2 = ou_partition_batch(0.5, 3, 500, seed=42)
    assert np.array_equal(b1.signs, b2.signs)
    assert np.array_equal(b1.labels, b2.labels)
    b3 = stable_chain_partition_batch(1.0, 0.5, 3, 500, seed=42)
    b4 = stable_chain_partition_batch(1.0, 0.5, 3, 500, seed=42)
    assert np.array_equal(b3.signs, b4.signs)


def test_parameter_errors():
    with pytest.raises(ValueError):
        ou_partition_batch(1.0, 3, 10, seed=0)
    with pytest.raises(ValueError):
        stable_chain_partition_batch(2.0, 0.5, 3, 10, seed=0)
    with pytest.raises(ValueError):
        stable_chain_partition_batch(1.0, 0.5, 0, 10, seed=0)


def test_ou_marginals_are_standard_normal():
    batch = ou_partition_batch(0.5, 3, 100_000, seed=20)
    for i in range(3):
        assert stats.kstest(batch.values[:, i], "norm").pvalue > 0.01


def test_stable_chain_marginals_are_stationary():
    # alpha = 1 with unit scale is the standard Cauchy at every index
    batch = stable_chain_partition_batch(1.0, 0.5, 3, 100_000, seed=21)
    for i in range(3):
        assert stats.kstest(batch.values[:, i], "cauchy").pvalue > 0.01
    direct = sample_sym_stable(1.0, 1.0, 100_000, seed=22)
    assert stats.ks_2samp(batch.values[:, 2], direct).pvalue > 0.01

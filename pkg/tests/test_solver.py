import math

import numpy as np
import pytest

from dcrep.gaussian import (correlations3, square_on_sphere_cov,
                            square_threshold_law_exact, symmetric_plus_mean_cov,
                            threshold_law_mc, zero_threshold_law_3)
from dcrep.partitions import (BinaryLaw, PartitionDistribution, color_map,
                              enumerate_partitions, marginalize_partition,
                              push_forward)
from dcrep.reports import Verdict
from dcrep.solver import (gaussian_sym_family_interval, lp_feasibility,
                          quick_sufficient_symmetric, signed_rep_3,
                          square_circle_solver, symmetric_plus_mean_gap,
                          symmetric_rep_family_3)

from conftest import random_probability_q


def product_law(n, p):
    probs = np.array([p ** bin(i).count("1") * (1 - p) ** (n - bin(i).count("1"))
                      for i in range(2 ** n)])
    return BinaryLaw(n, probs)


def test_signed_rep_3_product_law():
    rep = signed_rep_3(product_law(3, 0.3))
    assert rep.q_1_2_3 == pytest.approx(1.0, abs=1e-12)
    for v in (rep.q_12_3, rep.q_13_2, rep.q_1_23, rep.q_123):
        assert v == pytest.approx(0.0, abs=1e-12)
    assert rep.feasible


def test_signed_rep_3_full_coupling():
    probs = np.zeros(8)
    probs[0b111] = 0.3
    probs[0] = 0.7
    rep = signed_rep_3(BinaryLaw(3, probs))
    assert rep.q_123 == pytest.approx(1.0, abs=1e-12)
    assert rep.q_1_2_3 == pytest.approx(0.0, abs=1e-12)


def test_signed_rep_3_roundtrip(rng):
    for _ in range(50):
        q = random_probability_q(rng, 3)
        p = rng.choice([0.2, 0.35, 0.7])
        nu = push_forward(q, p)
        rep = signed_rep_3(nu)
        assert rep.feasible
        for sig in enumerate_partitions(3):
            assert rep.weights()[sig.key] == pytest.approx(
                q.weights.get(sig.key, 0.0), abs=1e-10)


def test_signed_rep_3_rejects_half_and_unequal():
    with pytest.raises(ValueError):
        signed_rep_3(product_law(3, 0.5))
    probs = np.zeros(8)
    probs[0b100] = 0.4
    probs[0] = 0.6
    with pytest.raises(ValueError):
        signed_rep_3(BinaryLaw(3, probs))


def test_symmetric_family_iid_coins():
    fam = symmetric_rep_family_3(product_law(3, 0.5))
    assert fam.t_lo == pytest.approx(0.5, abs=1e-12)
    assert fam.t_hi == pytest.approx(0.5, abs=1e-12)
    rep = fam.canonical()
    assert rep.weights["1|2|3"] == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("a", [0.1, 0.4, 0.8])
def test_symmetric_family_gaussian_interval(a):
    cov = correlations3(a, a, a)
    fam = symmetric_rep_family_3(zero_threshold_law_3(cov))
    lo, hi = gaussian_sym_family_interval(cov)
    assert fam.t_lo == pytest.approx(lo, abs=1e-12)
    assert fam.t_hi == pytest.approx(hi, abs=1e-12)
    assert not fam.is_empty
    theta = math.acos(a)
    assert lo == pytest.approx(max(0.0, 3 * theta / math.pi - 1.0), abs=1e-12)
    assert hi == pytest.approx(theta / math.pi, abs=1e-12)


def test_symmetric_family_members_push_forward(rng):
    cov = correlations3(0.3, 0.5, 0.2)
    nu = zero_threshold_law_3(cov)
    fam = symmetric_rep_family_3(nu)
    assert not fam.is_empty
    for t in np.linspace(fam.t_lo, fam.t_hi, 7):
        rep = fam.at(float(t))
        assert min(rep.weights.values()) >= -1e-12
        back = push_forward(rep, 0.5)
        assert np.allclose(back.probs, nu.probs, atol=1e-10)


def test_symmetric_family_rejects_asymmetric():
    with pytest.raises(ValueError):
        symmetric_rep_family_3(product_law(3, 0.4))


def test_square_family_inequality_margin():
    # adjacent angle arccos(cos^2 theta) at theta = pi/4 sits inside the caps
    # with gap pi/8 - pi/12
    theta = math.pi / 4
    gap = math.pi / 8 - (math.acos(math.cos(theta) ** 2) - theta)
    assert gap == pytest.approx(math.pi / 8 - math.pi / 12, abs=1e-12)


def test_lp_feasibility_negative_correlation_certificate():
    nu = BinaryLaw(2, [0.2, 0.3, 0.3, 0.2])  # nu_11 = 0.2 < 0.25: negative corr
    res = lp_feasibility(nu)
    assert res.status == "Infeasible"
    y = res.certificate
    assert y is not None
    mat = color_map(2, 0.5)
    assert float(np.max(y @ mat)) <= 1e-9
    assert float(y @ nu.probs) > 0.0


def test_lp_roundtrip_and_oracle_agreement(rng):
    mat_cache = {}
    for _ in range(60):
        q = random_probability_q(rng, 3)
        p = float(rng.choice([0.2, 0.35, 0.7]))
        nu = push_forward(q, p)
        res = lp_feasibility(nu)
        assert res.status == "Feasible"
        assert np.allclose(res.q.as_vector(), q.as_vector(), atol=1e-8)
        assert res.infeasibility_margin <= 1e-9
        assert signed_rep_3(nu).feasible


def test_lp_matches_signed_rep_on_infeasible(rng):
    # signed q vectors that still map to probability laws: feasible iff q >= 0
    found_infeasible = 0
    for _ in range(400):
        w = rng.dirichlet(np.ones(5)) + rng.normal(scale=0.08, size=5)
        w = w / w.sum()
        p = 0.3
        nu_vec = color_map(3, p) @ w
        if nu_vec.min() < 1e-6:
            continue
        nu = BinaryLaw(3, nu_vec / nu_vec.sum())
        if not nu.equal_marginals(1e-9):
            continue
        rep = signed_rep_3(nu)
        res = lp_feasibility(nu)
        if rep.min_weight() >= 1e-8:
            assert res.status == "Feasible"
        elif rep.min_weight() <= -1e-8:
            assert res.status == "Infeasible"
            found_infeasible += 1
    assert found_infeasible > 10


def test_lp_exact_mode():
    nu = BinaryLaw(2, [0.2, 0.3, 0.3, 0.2])
    res = lp_feasibility(nu, exact=True)
    assert res.status == "Infeasible"
    q = PartitionDistribution(2, {"12": 0.5, "1|2": 0.5})
    res = lp_feasibility(push_forward(q, 0.25), exact=True)
    assert res.status == "Feasible"
    assert np.allclose(res.q.as_vector(), q.as_vector(), atol=1e-12)


def test_lp_mc_relaxation_borderline():
    # boundary law (independent pair) estimated by MC: never Infeasible
    exact = product_law(2, 0.5)
    rngl = np.random.default_rng(3)
    m = 200_000
    counts = rngl.multinomial(m, exact.probs)
    nu = BinaryLaw.from_counts(counts, m)
    res = lp_feasibility(nu)
    assert res.status in ("Feasible", "Borderline")


def test_lp_dimension_and_marginal_errors():
    probs = np.zeros(8)
    probs[0b100] = 0.4
    probs[0] = 0.6
    with pytest.raises(ValueError):
        lp_feasibility(BinaryLaw(3, probs))
    with pytest.raises(ValueError):
        lp_feasibility(product_law(2, 0.3), p=0.6)


def test_square_circle_solver_feasible_at_quarter_pi():
    law = square_threshold_law_exact(math.pi / 4)
    res = square_circle_solver(math.pi / 4, 0.0, law)
    assert res.status == "Feasible"
    # reconstruction zero pattern
    for key in ("1|2|3|4", "13|2|4", "1|24|3", "13|24"):
        assert res.q.weights[key] == 0.0
    assert res.infeasibility_margin <= 1e-10


def test_square_circle_solver_small_theta_small_h():
    law = square_threshold_law_exact(0.25)
    res = square_circle_solver(0.25, 0.0, law)
    assert res.status == "Feasible"


def test_square_circle_reconstruction_restricts_to_family():
    theta = math.pi / 5
    law = square_threshold_law_exact(theta)
    res = square_circle_solver(theta, 0.0, law)
    assert res.status == "Feasible"
    # the 3-marginal of the reconstructed q is the t-family member used
    restricted = marginalize_partition(res.q, [1, 2, 3])
    fam = symmetric_rep_family_3(law.marginalize([1, 2, 3]))
    expected = fam.weights_at(res.detail["t_lo"])
    for key, val in expected.items():
        assert restricted.weights.get(key, 0.0) == pytest.approx(val, abs=1e-9)
    # and it reproduces the four-dimensional law
    assert np.allclose(push_forward(res.q, 0.5).probs, law.probs, atol=1e-9)


def test_square_circle_solver_large_h_infeasible():
    theta, h, m = math.pi / 5, 3.0, 1_000_000
    law = threshold_law_mc(square_on_sphere_cov(theta), h, m, seed=37)
    res = square_circle_solver(theta, h, law)
    assert res.status == "Infeasible"


def test_square_circle_solver_rejects_bad_input():
    law = zero_threshold_law_3(correlations3(0.2, 0.2, 0.2))
    with pytest.raises(ValueError):
        square_circle_solver(None, None, law)  # wrong n
    asym = product_law(4, 0.3)
    with pytest.raises(ValueError):
        square_circle_solver(None, None, asym)  # nu_0101 != 0


def test_quick_sufficient_symmetric():
    probs = np.zeros(8)
    probs[0] = 0.5
    probs[7] = 0.5
    assert quick_sufficient_symmetric(BinaryLaw(3, probs)) is Verdict.COLOR_REP
    assert quick_sufficient_symmetric(product_law(3, 0.5)) is Verdict.UNDETERMINED
    with pytest.raises(ValueError):
        quick_sufficient_symmetric(product_law(3, 0.3))


def test_quick_sufficient_symmetric_plus_mean_large_a():
    cov = symmetric_plus_mean_cov(4, 0.95)
    law = threshold_law_mc(cov, 0.0, 200_000, seed=41)
    assert quick_sufficient_symmetric(law) is Verdict.COLOR_REP


def test_symmetric_plus_mean_gap():
    assert symmetric_plus_mean_gap(3) == pytest.approx(0.0, abs=1e-12)
    assert symmetric_plus_mean_gap(4) == pytest.approx(
        math.pi / 3 - math.asin(math.sqrt(2.0 / 3.0)), abs=1e-15)
    assert all(symmetric_plus_mean_gap(n) > 0 for n in range(4, 12))


@pytest.mark.parametrize("n", [4, 5])
@pytest.mark.parametrize("p", [0.2, 0.5, 0.8])
def test_lp_roundtrip_larger_n(rng, n, p):
    for _ in range(5):
        q = random_probability_q(rng, n)
        nu = push_forward(q, p)
        res = lp_feasibility(nu)
        assert res.status == "Feasible"
        back = push_forward(res.q, p)
        assert np.allclose(back.probs, nu.probs, atol=1e-8)


def test_lp_rejects_negative_pairwise_correlation_n3():
    # X1 an independent coin; (X2, X3) negatively correlated with the same marginal
    p, delta = 0.4, 0.05
    pair = {"11": p * p - delta, "10": p * (1 - p) + delta,
            "01": p * (1 - p) + delta, "00": (1 - p) ** 2 - delta}
    probs = np.zeros(8)
    for bc, w in pair.items():
        probs[int("1" + bc, 2)] = p * w
        probs[int("0" + bc, 2)] = (1 - p) * w
    nu = BinaryLaw(3, probs)
    assert np.allclose(nu.marginals(), p, atol=1e-12)
    assert lp_feasibility(nu).status == "Infeasible"


def test_square_small_theta_small_h_window():
    # the h -> 0 representation of the 3-marginal sits strictly inside the
    # square's reconstruction caps for small theta: representability extends
    # to small positive thresholds by continuity
    from dcrep.asymptotics import small_h_limits_3
    for theta in (0.1, 0.2, 0.3):
        cov3 = square_on_sphere_cov(theta).principal([1, 2, 3])
        lims = small_h_limits_3(cov3)
        t_small_h = lims.q_1_2_3 / 2.0
        # closed form of the same t
        arg = 2.0 * math.sin(theta) ** 4 / (1.0 + math.cos(theta) ** 2) ** 2 - 1.0
        assert t_small_h == pytest.approx(1.0 - math.acos(arg) / math.pi, abs=1e-12)
        theta_adj = math.acos(math.cos(theta) ** 2)
        lo = (2.0 * theta_adj - math.pi / 2.0) / math.pi
        hi = 2.0 * (2.0 * theta - theta_adj) / math.pi
        assert lo < t_small_h < hi
        assert min(lims.as_dict().values()) > 0


def test_square_circle_solver_mc_small_positive_h():
    # moderate theta, small positive threshold: representable, and the
    # reconstruction survives MC marginal noise
    theta, h = 0.2, 0.15
    law = threshold_law_mc(square_on_sphere_cov(theta), h, 2_000_000, seed=51)
    res = square_circle_solver(theta, h, law)
    assert res.status == "Feasible"
    assert min(res.q.weights.values()) >= -1e-9
    assert res.infeasibility_margin < 0.01

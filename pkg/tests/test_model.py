"""Tests for the quadrature posterior and its per-dose summaries.

Frozen expected values were computed before the implementation by
independent oracles, each noted at its constant:
  * FINE:   trapezoid rule with 10**6 + 1 nodes on [-10, 10]
  * MC:     10**7 draws from the alpha prior, classified dose by dose
  * CLOSED: normal-CDF expressions evaluated at analytically located
            region boundaries
"""
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rcrm.model import (
    ModelConfig,
    ObservationSet,
    ValidationError,
    compute_posterior,
    dlt_probability,
    log_likelihood,
    mtd_index,
    mtd_probabilities,
    overtoxicity_probability,
)

CFG = ModelConfig()
D = CFG.n_doses
EMPTY = ObservationSet.empty(D)

# FINE oracle, prior only
PRIOR_DOSE_MEANS = (
    0.186700167912,
    0.241823847718,
    0.279294382072,
    0.324153402607,
    0.381195982828,
    0.474419167760,
)
# MC oracle (seed 987654321), prior only
PRIOR_MTD_PROBS_MC = (0.287570, 0.060976, 0.052866, 0.063816, 0.091066, 0.443706)
# CLOSED oracle: CDF mass between region boundaries, renormalized to [-10, 10]
PRIOR_MTD_PROBS_CLOSED = (
    0.287454884152,
    0.061147222745,
    0.052926557863,
    0.063893267794,
    0.091100740518,
    0.443477326929,
)
# CLOSED oracle: Phi((ln(ln 0.30 / ln 0.01) - 0) / 2), untruncated
PRIOR_P_OVERTOXIC = 0.25118148129604434
# FINE oracle, tallies n_1=3, y_1=0
DOSE_MEANS_3_OF_3_CLEAN = (
    0.0374817110,
    0.0713291553,
    0.0998762191,
    0.1390538949,
    0.1953752043,
    0.2992088457,
)
# FINE oracle, tallies n_1=3, y_1=3
P_OVERTOXIC_3_OF_3_DLT = 0.9877900203613621


def obs_at_dose1(n, y):
    return ObservationSet((n, 0, 0, 0, 0, 0), (y, 0, 0, 0, 0, 0))


class TestDltProbability:
    def test_alpha_zero_returns_skeleton_value(self):
        assert dlt_probability(0.0, 5, CFG) == pytest.approx(0.30, abs=1e-15)

    def test_large_alpha_drives_probability_to_zero(self):
        assert dlt_probability(50.0, 1, CFG) < 1e-10

    def test_hand_value_alpha_ln2_dose6(self):
        assert dlt_probability(np.log(2.0), 6, CFG) == pytest.approx(0.25, abs=1e-12)

    def test_dose_out_of_range_rejected(self):
        with pytest.raises(ValidationError):
            dlt_probability(0.0, 0, CFG)
        with pytest.raises(ValidationError):
            dlt_probability(0.0, 7, CFG)

    def test_monotone_in_dose_and_alpha(self):
        rng = np.random.default_rng(20260814)
        alphas = rng.uniform(-5.0, 5.0, size=1000)
        for a in alphas:
            probs = [dlt_probability(a, d, CFG) for d in range(1, D + 1)]
            assert all(x < y for x, y in zip(probs, probs[1:]))
        for d in range(1, D + 1):
            probs = [dlt_probability(a, d, CFG) for a in np.sort(alphas)]
            assert all(x > y for x, y in zip(probs, probs[1:]))


class TestLogLikelihood:
    def test_empty_observations_give_zero(self):
        assert log_likelihood(0.7, EMPTY, CFG) == 0.0

    def test_single_dlt_at_dose5(self):
        obs = ObservationSet((0, 0, 0, 0, 1, 0), (0, 0, 0, 0, 1, 0))
        assert log_likelihood(0.0, obs, CFG) == pytest.approx(-1.2039728043259361, abs=1e-12)

    def test_three_clean_subjects_at_dose1(self):
        assert log_likelihood(0.0, obs_at_dose1(3, 0), CFG) == pytest.approx(
            -0.030151007560504352, abs=1e-12
        )

    def test_length_mismatch_rejected(self):
        with pytest.raises(ValidationError):
            log_likelihood(0.0, ObservationSet.empty(4), CFG)


class TestMtdIndex:
    def test_exact_skeleton_match(self):
        assert mtd_index(0.0, CFG) == 5

    def test_saturated_high_alpha_picks_top_dose(self):
        # all thetas underflow toward 0; the top dose is still the closest
        assert mtd_index(50.0, CFG) == 6

    def test_saturated_low_alpha_picks_bottom_dose(self):
        assert mtd_index(-50.0, CFG) == 1

    def test_nondecreasing_step_function(self):
        grid = np.linspace(CFG.grid_lo, CFG.grid_hi, 10_000)
        idx = np.array([mtd_index(a, CFG) for a in grid])
        assert (np.diff(idx) >= 0).all()
        assert idx[0] == 1 and idx[-1] == D


class TestComputePosterior:
    def test_prior_dose_means_match_fine_oracle(self):
        post = compute_posterior(EMPTY, CFG)
        np.testing.assert_allclose(post.dose_means, PRIOR_DOSE_MEANS, rtol=0, atol=1e-6)

    def test_updated_dose_means_match_fine_oracle(self):
        post = compute_posterior(obs_at_dose1(3, 0), CFG)
        np.testing.assert_allclose(post.dose_means, DOSE_MEANS_3_OF_3_CLEAN, rtol=0, atol=1e-6)

    def test_prior_mtd_probs_match_mc_oracle(self):
        post = compute_posterior(EMPTY, CFG)
        np.testing.assert_allclose(post.mtd_probs, PRIOR_MTD_PROBS_MC, rtol=0, atol=0.002)

    def test_prior_mtd_probs_match_closed_form(self):
        post = compute_posterior(EMPTY, CFG)
        np.testing.assert_allclose(post.mtd_probs, PRIOR_MTD_PROBS_CLOSED, rtol=0, atol=1e-9)

    def test_prior_overtoxicity_matches_closed_form(self):
        post = compute_posterior(EMPTY, CFG)
        assert post.p_overtoxic == pytest.approx(PRIOR_P_OVERTOXIC, abs=1e-6)

    def test_overtoxicity_after_three_dlts(self):
        post = compute_posterior(obs_at_dose1(3, 3), CFG)
        assert post.p_overtoxic == pytest.approx(P_OVERTOXIC_3_OF_3_DLT, abs=1e-5)

    def test_extreme_toxicity_forces_stop_region(self):
        post = compute_posterior(obs_at_dose1(15, 15), CFG)
        assert post.p_overtoxic > 0.90

    def test_grid_refinement_leaves_summaries_unchanged(self):
        # halving the spacing must not move any summary by 1e-8
        fine_cfg = ModelConfig(grid_points=4001)
        for obs in (EMPTY, obs_at_dose1(6, 2)):
            a = compute_posterior(obs, CFG)
            b = compute_posterior(obs, fine_cfg)
            np.testing.assert_allclose(a.dose_means, b.dose_means, rtol=0, atol=1e-8)
            np.testing.assert_allclose(a.mtd_probs, b.mtd_probs, rtol=0, atol=1e-8)
            assert abs(a.p_overtoxic - b.p_overtoxic) < 1e-8

    def test_deterministic_bit_identical(self):
        obs = obs_at_dose1(9, 2)
        a = compute_posterior(obs, CFG)
        b = compute_posterior(obs, CFG)
        assert (a.weights == b.weights).all()
        assert (a.dose_means == b.dose_means).all()
        assert (a.mtd_probs == b.mtd_probs).all()
        assert a.p_overtoxic == b.p_overtoxic

    def test_order_of_accumulation_is_irrelevant(self):
        fwd = EMPTY.add(1, 3, 0).add(2, 3, 1).add(3, 3, 2)
        rev = EMPTY.add(3, 3, 2).add(2, 3, 1).add(1, 3, 0)
        a = compute_posterior(fwd, CFG)
        b = compute_posterior(rev, CFG)
        assert (a.weights == b.weights).all()
        assert (a.dose_means == b.dose_means).all()

    @settings(max_examples=40, deadline=None)
    @given(
        data=st.lists(
            st.tuples(st.integers(1, 6), st.integers(0, 6), st.integers(0, 6)),
            min_size=0,
            max_size=8,
        )
    )
    def test_random_tallies_keep_invariants(self, data):
        obs = EMPTY
        for dose, n, y in data:
            obs = obs.add(dose, n, min(n, y))
        post = compute_posterior(obs, CFG)
        assert abs(post.weights.sum() - 1.0) < 1e-12
        assert abs(post.mtd_probs.sum() - 1.0) < 1e-12
        assert (post.mtd_probs >= 0).all()
        assert 0.0 <= post.p_overtoxic <= 1.0
        assert (np.diff(post.dose_means) > 0).all()
        assert ((post.dose_means > 0) & (post.dose_means < 1)).all()


class TestStandaloneSummaries:
    def test_mtd_probabilities_on_default_grid_match_mc_oracle(self):
        post = compute_posterior(EMPTY, CFG)
        probs = mtd_probabilities(post.nodes, post.weights, CFG)
        np.testing.assert_allclose(probs, PRIOR_MTD_PROBS_MC, rtol=0, atol=0.002)
        assert abs(probs.sum() - 1.0) < 1e-12

    def test_point_mass_at_zero_concentrates_on_dose5(self):
        probs = mtd_probabilities([0.0, 0.0], [0.5, 0.5], CFG)
        np.testing.assert_allclose(probs, [0, 0, 0, 0, 1.0, 0], rtol=0, atol=1e-15)

    def test_overtoxicity_on_default_grid_matches_closed_form(self):
        post = compute_posterior(EMPTY, CFG)
        ov = overtoxicity_probability(post.nodes, post.weights, CFG)
        assert ov == pytest.approx(PRIOR_P_OVERTOXIC, abs=1e-6)

    def test_point_mass_at_zero_is_not_overtoxic(self):
        assert overtoxicity_probability([0.0, 0.0], [0.5, 0.5], CFG) == 0.0

    def test_point_mass_at_minus_ten_is_overtoxic(self):
        assert overtoxicity_probability([-10.0, -10.0], [0.5, 0.5], CFG) == 1.0

    @settings(max_examples=40, deadline=None)
    @given(
        n=st.lists(st.integers(0, 9), min_size=6, max_size=6),
        frac=st.lists(st.floats(0, 1), min_size=6, max_size=6),
    )
    def test_sum_to_one_for_random_tallies(self, n, frac):
        y = [int(round(f * k)) for f, k in zip(frac, n)]
        post = compute_posterior(ObservationSet(tuple(n), tuple(y)), CFG)
        probs = mtd_probabilities(post.nodes, post.weights, CFG)
        assert abs(probs.sum() - 1.0) < 1e-12


class TestValidation:
    def test_decreasing_skeleton_rejected(self):
        with pytest.raises(ValidationError, match="strictly increasing"):
            ModelConfig(skeleton=(0.5, 0.3, 0.1))

    def test_flat_skeleton_rejected(self):
        with pytest.raises(ValidationError, match="strictly increasing"):
            ModelConfig(skeleton=(0.1, 0.1, 0.2))

    def test_skeleton_bounds_rejected(self):
        with pytest.raises(ValidationError):
            ModelConfig(skeleton=(0.0, 0.5))
        with pytest.raises(ValidationError):
            ModelConfig(skeleton=(0.5, 1.0))

    def test_empty_skeleton_rejected(self):
        with pytest.raises(ValidationError, match="nonempty"):
            ModelConfig(skeleton=())

    def test_target_bounds_rejected(self):
        with pytest.raises(ValidationError):
            ModelConfig(target=0.0)
        with pytest.raises(ValidationError):
            ModelConfig(target=1.0)

    def test_prior_sd_must_be_positive(self):
        with pytest.raises(ValidationError):
            ModelConfig(prior_sd=0.0)

    def test_grid_bounds_ordered(self):
        with pytest.raises(ValidationError):
            ModelConfig(grid_lo=1.0, grid_hi=1.0)

    def test_grid_points_odd_and_at_least_three(self):
        with pytest.raises(ValidationError):
            ModelConfig(grid_points=2000)
        with pytest.raises(ValidationError):
            ModelConfig(grid_points=1)

    def test_observation_set_bounds(self):
        with pytest.raises(ValidationError):
            ObservationSet((1, 1), (2, 0))
        with pytest.raises(ValidationError):
            ObservationSet((-1, 1), (0, 0))
        with pytest.raises(ValidationError):
            ObservationSet((1, 1), (0,))

    def test_add_rejects_out_of_range_dose(self):
        with pytest.raises(ValidationError):
            EMPTY.add(0, 3, 0)
        with pytest.raises(ValidationError):
            EMPTY.add(7, 3, 0)

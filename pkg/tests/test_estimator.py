"""Tests for the estimator facade: sklearn conventions plus agreement
with the underlying posterior computation."""
import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from rcrm.estimator import CrmEstimator
from rcrm.model import ModelConfig, ObservationSet, ValidationError, compute_posterior


def subject_data():
    # 3 at dose 1 (0 DLT), 3 at dose 2 (1 DLT), 3 at dose 3 (2 DLT)
    X = np.array([[1], [1], [1], [2], [2], [2], [3], [3], [3]])
    y = np.array([0, 0, 0, 1, 0, 0, 1, 1, 0])
    return X, y


class TestFit:
    def test_fit_matches_direct_posterior(self):
        X, y = subject_data()
        est = CrmEstimator().fit(X, y)
        obs = ObservationSet((3, 3, 3, 0, 0, 0), (0, 1, 2, 0, 0, 0))
        post = compute_posterior(obs, ModelConfig())
        assert (est.dose_means_ == post.dose_means).all()
        assert (est.mtd_probs_ == post.mtd_probs).all()
        assert est.p_overtoxic_ == post.p_overtoxic
        assert est.observations_ == obs

    def test_mtd_is_closest_to_target(self):
        X, y = subject_data()
        est = CrmEstimator().fit(X, y)
        assert est.mtd_ == int(np.argmin(np.abs(est.dose_means_ - 0.30))) + 1

    def test_fit_returns_self_and_sets_shape_attrs(self):
        X, y = subject_data()
        est = CrmEstimator()
        assert est.fit(X, y) is est
        assert est.n_features_in_ == 1

    def test_subject_order_is_irrelevant(self):
        X, y = subject_data()
        perm = np.random.default_rng(3).permutation(len(y))
        a = CrmEstimator().fit(X, y)
        b = CrmEstimator().fit(X[perm], y[perm])
        assert (a.dose_means_ == b.dose_means_).all()


class TestPredict:
    def test_predict_reads_off_dose_means(self):
        X, y = subject_data()
        est = CrmEstimator().fit(X, y)
        out = est.predict([[3], [1], [6]])
        np.testing.assert_array_equal(
            out, est.dose_means_[[2, 0, 5]]
        )

    def test_unfitted_predict_raises(self):
        with pytest.raises(NotFittedError):
            CrmEstimator().predict([[1]])


class TestValidation:
    def test_rejects_non_binary_outcomes(self):
        with pytest.raises(ValidationError, match="0/1"):
            CrmEstimator().fit([[1], [2]], [0, 2])

    def test_rejects_out_of_range_doses(self):
        with pytest.raises(ValidationError, match="1..6"):
            CrmEstimator().fit([[0], [1]], [0, 0])
        with pytest.raises(ValidationError):
            CrmEstimator().fit([[7]], [0])

    def test_rejects_fractional_doses(self):
        with pytest.raises(ValidationError, match="integer"):
            CrmEstimator().fit([[1.5]], [0])

    def test_rejects_multicolumn_X(self):
        with pytest.raises(ValidationError, match="one column"):
            CrmEstimator().fit([[1, 2]], [0])

    def test_invalid_config_params_surface_at_fit(self):
        est = CrmEstimator(skeleton=(0.5, 0.3))
        with pytest.raises(ValidationError, match="strictly increasing"):
            est.fit([[1]], [0])


class TestSklearnProtocol:
    def test_get_params_round_trip(self):
        est = CrmEstimator(target=0.25, grid_points=1001)
        params = est.get_params()
        assert params["target"] == 0.25
        assert params["grid_points"] == 1001
        est2 = CrmEstimator(**params)
        assert est2.get_params() == params

    def test_set_params_and_clone(self):
        est = CrmEstimator().set_params(prior_sd=1.5)
        dup = clone(est)
        assert dup.get_params()["prior_sd"] == 1.5
        X, y = subject_data()
        est.fit(X, y)
        assert not hasattr(dup, "dose_means_")

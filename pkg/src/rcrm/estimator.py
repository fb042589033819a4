"""Scikit-learn style wrapper around the toxicity posterior.

Subject-level data come in as (dose index, DLT indicator) pairs; fitting
tallies them and computes the quadrature posterior, exposing the per-dose
summaries as fitted attributes.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from rcrm.model import (
    DEFAULT_SKELETON,
    DEFAULT_TARGET,
    ModelConfig,
    ObservationSet,
    ValidationError,
    compute_posterior,
)

__all__ = ["CrmEstimator"]


class CrmEstimator(BaseEstimator):
    """Posterior mean toxicity curve and MTD estimate from subject outcomes.

    Parameters mirror the model configuration. X holds one column of
    1-based dose indices; y holds binary DLT indicators.

    Attributes set by fit:
      dose_means_   posterior mean P(DLT) per dose
      mtd_probs_    posterior probability that each dose is the MTD
      p_overtoxic_  posterior probability the lowest dose exceeds target
      mtd_          1-based dose whose mean toxicity is closest to target
      n_features_in_  always 1
    """

    def __init__(
        self,
        skeleton=DEFAULT_SKELETON,
        target=DEFAULT_TARGET,
        prior_mean=0.0,
        prior_sd=2.0,
        grid_lo=-10.0,
        grid_hi=10.0,
        grid_points=2001,
    ):
        self.skeleton = skeleton
        self.target = target
        self.prior_mean = prior_mean
        self.prior_sd = prior_sd
        self.grid_lo = grid_lo
        self.grid_hi = grid_hi
        self.grid_points = grid_points

    def _config(self) -> ModelConfig:
        return ModelConfig(
            skeleton=tuple(self.skeleton),
            target=self.target,
            prior_mean=self.prior_mean,
            prior_sd=self.prior_sd,
            grid_lo=self.grid_lo,
            grid_hi=self.grid_hi,
            grid_points=self.grid_points,
        )

    def _validate_doses(self, X, n_doses: int) -> np.ndarray:
        doses = np.asarray(X, dtype=float).ravel()
        if not np.array_equal(doses, np.round(doses)):
            raise ValidationError("dose indices must be integers")
        doses = doses.astype(int)
        if ((doses < 1) | (doses > n_doses)).any():
            raise ValidationError(f"dose indices must lie in 1..{n_doses}")
        return doses

    def fit(self, X, y):
        config = self._config()
        X, y = check_X_y(X, y, ensure_2d=True)
        if X.shape[1] != 1:
            raise ValidationError("X must have exactly one column of dose indices")
        y = np.asarray(y)
        if not np.isin(y, (0, 1)).all():
            raise ValidationError("y must contain only 0/1 DLT indicators")
        doses = self._validate_doses(X, config.n_doses)

        obs = ObservationSet.empty(config.n_doses)
        for dose in range(1, config.n_doses + 1):
            at = doses == dose
            if at.any():
                obs = obs.add(dose, int(at.sum()), int(y[at].sum()))
        post = compute_posterior(obs, config)

        self.n_features_in_ = 1
        self.observations_ = obs
        self.posterior_ = post
        self.dose_means_ = post.dose_means
        self.mtd_probs_ = post.mtd_probs
        self.p_overtoxic_ = post.p_overtoxic
        self.mtd_ = int(np.argmin(np.abs(post.dose_means - config.target))) + 1
        return self

    def predict(self, X):
        """Posterior mean P(DLT) for each row's dose index."""
        check_is_fitted(self, "dose_means_")
        X = check_array(X, ensure_2d=True)
        if X.shape[1] != 1:
            raise ValidationError("X must have exactly one column of dose indices")
        doses = self._validate_doses(X, len(self.dose_means_))
        return self.dose_means_[doses - 1]

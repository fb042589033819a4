"""Power-model toxicity posterior over a one-parameter dose-toxicity curve.

P(DLT | dose d) = p_d ** exp(alpha), with a normal prior on alpha. The
posterior is computed by deterministic quadrature on a fixed alpha grid,
so identical inputs always produce bit-identical outputs.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import ceil, log
import numbers

import numpy as np
from scipy.optimize import brentq

__all__ = [
    "ValidationError",
    "ModelConfig",
    "ObservationSet",
    "Posterior",
    "dlt_probability",
    "log_likelihood",
    "compute_posterior",
    "mtd_index",
    "mtd_probabilities",
    "overtoxicity_probability",
]

DEFAULT_SKELETON = (0.01, 0.05, 0.10, 0.18, 0.30, 0.50)
DEFAULT_TARGET = 0.30


class ValidationError(ValueError):
    """Raised when a config or input violates a documented invariant."""


@dataclass(frozen=True)
class ModelConfig:
    """Skeleton, target rate, prior on alpha, and quadrature grid settings."""

    skeleton: tuple[float, ...] = DEFAULT_SKELETON
    target: float = DEFAULT_TARGET
    prior_mean: float = 0.0
    prior_sd: float = 2.0
    grid_lo: float = -10.0
    grid_hi: float = 10.0
    grid_points: int = 2001

    def __post_init__(self):
        object.__setattr__(self, "skeleton", tuple(float(p) for p in self.skeleton))
        if len(self.skeleton) == 0:
            raise ValidationError("skeleton must be nonempty")
        if any(not (0.0 < p < 1.0) for p in self.skeleton):
            raise ValidationError("skeleton values must lie in the open interval (0, 1)")
        if any(a >= b for a, b in zip(self.skeleton, self.skeleton[1:])):
            raise ValidationError("skeleton must be strictly increasing")
        if not (0.0 < self.target < 1.0):
            raise ValidationError("target must lie in the open interval (0, 1)")
        if not self.prior_sd > 0.0:
            raise ValidationError("prior_sd must be positive")
        if not self.grid_lo < self.grid_hi:
            raise ValidationError("grid_lo must be less than grid_hi")
        if not (isinstance(self.grid_points, numbers.Integral) and self.grid_points >= 3):
            raise ValidationError("grid_points must be an integer >= 3")
        if self.grid_points % 2 == 0:
            raise ValidationError("grid_points must be odd")

    @property
    def n_doses(self) -> int:
        return len(self.skeleton)


@dataclass(frozen=True)
class ObservationSet:
    """Per-dose tallies of subjects treated and DLTs observed.

    Tallies are sufficient for the likelihood, so the order in which
    outcomes accumulated never matters.
    """

    n_subjects: tuple[int, ...]
    n_dlts: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "n_subjects", tuple(int(n) for n in self.n_subjects))
        object.__setattr__(self, "n_dlts", tuple(int(y) for y in self.n_dlts))
        if len(self.n_subjects) != len(self.n_dlts):
            raise ValidationError("n_subjects and n_dlts must have equal length")
        if any(n < 0 for n in self.n_subjects):
            raise ValidationError("subject counts must be nonnegative")
        if any(not (0 <= y <= n) for y, n in zip(self.n_dlts, self.n_subjects)):
            raise ValidationError("DLT counts must satisfy 0 <= y_d <= n_d")

    @classmethod
    def empty(cls, n_doses: int) -> "ObservationSet":
        return cls((0,) * n_doses, (0,) * n_doses)

    def add(self, dose: int, n_subjects: int, n_dlts: int) -> "ObservationSet":
        """Return a new set with one more cohort tallied at a 1-based dose."""
        if not 1 <= dose <= len(self.n_subjects):
            raise ValidationError(f"dose {dose} out of range 1..{len(self.n_subjects)}")
        ns = list(self.n_subjects)
        ys = list(self.n_dlts)
        ns[dose - 1] += n_subjects
        ys[dose - 1] += n_dlts
        return ObservationSet(tuple(ns), tuple(ys))

    @property
    def total_subjects(self) -> int:
        return sum(self.n_subjects)

    @property
    def total_dlts(self) -> int:
        return sum(self.n_dlts)

    def is_empty(self) -> bool:
        return self.total_subjects == 0


@dataclass(frozen=True, eq=False)
class Posterior:
    """Discretized posterior over alpha plus the per-dose summaries."""

    nodes: np.ndarray
    weights: np.ndarray
    dose_means: np.ndarray
    mtd_probs: np.ndarray
    p_overtoxic: float


def _log_theta(alpha: np.ndarray, config: ModelConfig) -> np.ndarray:
    # exp(alpha) * ln(p_d), shape (len(alpha), D); exact even where theta underflows
    lam = np.exp(np.asarray(alpha, dtype=float))
    return np.multiply.outer(lam, np.log(np.asarray(config.skeleton)))


def _theta(alpha: np.ndarray, config: ModelConfig) -> np.ndarray:
    return np.exp(_log_theta(alpha, config))


def dlt_probability(alpha: float, dose: int, config: ModelConfig) -> float:
    """Toxicity probability p_dose ** exp(alpha) at a 1-based dose index."""
    if not 1 <= dose <= config.n_doses:
        raise ValidationError(f"dose {dose} out of range 1..{config.n_doses}")
    return float(_theta(np.array([float(alpha)]), config)[0, dose - 1])


def _log_likelihood_vec(alpha: np.ndarray, obs: ObservationSet, config: ModelConfig) -> np.ndarray:
    if len(obs.n_subjects) != config.n_doses:
        raise ValidationError("observation set length does not match skeleton")
    y = np.asarray(obs.n_dlts, dtype=float)
    miss = np.asarray(obs.n_subjects, dtype=float) - y
    alpha = np.asarray(alpha, dtype=float)
    logth = _log_theta(alpha, config)
    theta = np.exp(logth)
    # ln(1 - theta): where theta rounds to 1.0, use 1 - p**x ~ -x ln p, i.e.
    # ln(1 - theta) ~ alpha + ln(-ln p), instead of log1p(-1) = -inf
    logp = np.log(np.asarray(config.skeleton))
    with np.errstate(divide="ignore"):
        log1m = np.where(
            theta < 1.0,
            np.log1p(-theta),
            alpha[:, None] + np.log(-logp)[None, :],
        )
    out = np.zeros(alpha.shape, dtype=float)
    ym = y > 0
    mm = miss > 0
    if ym.any():
        out += logth[:, ym] @ y[ym]
    if mm.any():
        out += log1m[:, mm] @ miss[mm]
    return out


def log_likelihood(alpha: float, obs: ObservationSet, config: ModelConfig) -> float:
    """Binomial log likelihood of the tallies at a single alpha; 0 if empty."""
    return float(_log_likelihood_vec(np.array([float(alpha)]), obs, config)[0])


def _mtd_index_vec(alpha: np.ndarray, config: ModelConfig) -> np.ndarray:
    """Vectorized 1-based index of the dose whose theta is closest to target.

    theta is strictly increasing in dose, so the minimizer is either the
    highest dose still below target or the lowest dose at/above it. Comparing
    just those two stays exact even when distant thetas saturate to 0 or 1
    in floating point (where naive |theta - target| ties at exactly target).
    """
    theta = _theta(alpha, config)
    d = config.n_doses
    k = (theta < config.target).sum(axis=1)  # doses strictly below target
    lo = np.clip(k - 1, 0, d - 1)
    hi = np.clip(k, 0, d - 1)
    rows = np.arange(theta.shape[0])
    below = config.target - theta[rows, lo]
    above = theta[rows, hi] - config.target
    return np.where(above < below, hi, lo) + 1  # tie goes to the lower dose


def mtd_index(alpha: float, config: ModelConfig) -> int:
    """1-based dose whose toxicity probability is closest to the target."""
    return int(_mtd_index_vec(np.array([float(alpha)]), config)[0])


def _overtox_threshold(config: ModelConfig) -> float:
    # theta(1; alpha) > target exactly when alpha < this value
    return log(log(config.target) / log(config.skeleton[0]))


@lru_cache(maxsize=None)
def _mtd_breakpoints(config: ModelConfig) -> tuple[float, ...]:
    """Alpha values where adjacent doses are equidistant from the target.

    theta_d + theta_{d+1} - 2*target is strictly decreasing in alpha from 2
    down to 0, so each equation has exactly one root and the roots ascend
    with d. They partition the alpha axis into the per-dose MTD regions.
    """
    target2 = 2.0 * config.target

    def gap(log_pd: float, log_pn: float):
        return lambda a: np.exp(np.exp(a) * log_pd) + np.exp(np.exp(a) * log_pn) - target2

    roots = []
    for pd, pn in zip(config.skeleton, config.skeleton[1:]):
        roots.append(brentq(gap(log(pd), log(pn)), -60.0, 60.0, xtol=1e-14, rtol=8.9e-16))
    return tuple(roots)


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(20)
_MAX_PANEL_WIDTH = 0.25


@lru_cache(maxsize=None)
def _panel_layout(config: ModelConfig):
    """Quadrature panels split at every MTD-region or overtoxicity boundary.

    Each panel lies entirely inside one MTD region and on one side of the
    overtoxicity threshold, so integrating the posterior density over panels
    yields region masses limited only by quadrature accuracy, not by the
    alpha-grid spacing.
    """
    t = _overtox_threshold(config)
    cuts = sorted(set(_mtd_breakpoints(config)) | {t})
    edges = [config.grid_lo]
    edges += [c for c in cuts if config.grid_lo < c < config.grid_hi]
    edges.append(config.grid_hi)
    mids, halves = [], []
    for a, b in zip(edges, edges[1:]):
        k = max(1, ceil((b - a) / _MAX_PANEL_WIDTH))
        sub = np.linspace(a, b, k + 1)
        mids.append((sub[:-1] + sub[1:]) / 2.0)
        halves.append(np.diff(sub) / 2.0)
    mids = np.concatenate(mids)
    halves = np.concatenate(halves)
    dose = _mtd_index_vec(mids, config)
    below_t = mids < t
    return mids, halves, dose, below_t


def _log_prior(alpha: np.ndarray, config: ModelConfig) -> np.ndarray:
    z = (np.asarray(alpha, dtype=float) - config.prior_mean) / config.prior_sd
    return -0.5 * z * z  # constant factors cancel under normalization


def compute_posterior(obs: ObservationSet, config: ModelConfig) -> Posterior:
    """Posterior over alpha and its per-dose summaries, by fixed quadrature.

    Node weights come from the trapezoid rule on the alpha grid and drive
    dose_means. The MTD and overtoxicity masses are integrated per panel
    between the exact region boundaries, which keeps them stable under grid
    refinement and faithful to the analytic values.
    """
    nodes = np.linspace(config.grid_lo, config.grid_hi, config.grid_points)
    log_dens = _log_prior(nodes, config) + _log_likelihood_vec(nodes, obs, config)
    dens = np.exp(log_dens - log_dens.max())  # guard: likelihoods underflow for large n
    coeff = np.ones(config.grid_points)
    coeff[0] = coeff[-1] = 0.5
    weights = coeff * dens
    weights /= weights.sum()
    dose_means = weights @ _theta(nodes, config)

    mids, halves, dose, below_t = _panel_layout(config)
    gl_alpha = (mids[:, None] + halves[:, None] * _GL_NODES[None, :]).ravel()
    gl_log_dens = _log_prior(gl_alpha, config) + _log_likelihood_vec(gl_alpha, obs, config)
    gl_dens = np.exp(gl_log_dens - gl_log_dens.max()).reshape(len(mids), -1)
    panel_mass = (gl_dens @ _GL_WEIGHTS) * halves
    total = panel_mass.sum()
    mtd_probs = np.bincount(dose - 1, weights=panel_mass, minlength=config.n_doses) / total
    p_overtoxic = float(min(1.0, max(0.0, panel_mass[below_t].sum() / total)))

    return Posterior(
        nodes=nodes,
        weights=weights,
        dose_means=dose_means,
        mtd_probs=mtd_probs,
        p_overtoxic=p_overtoxic,
    )


def _uniform_spacing(nodes: np.ndarray) -> float | None:
    """Grid spacing if nodes are an ascending uniform grid, else None."""
    if nodes.ndim != 1 or len(nodes) < 3:
        return None
    d = np.diff(nodes)
    h = d[0]
    if h <= 0.0 or not np.allclose(d, h, rtol=1e-9, atol=0.0):
        return None
    return float(h)


def _mass_below(nodes: np.ndarray, weights: np.ndarray, h: float, x: float) -> float:
    """Mass of {alpha < x} under the piecewise-linear density the trapezoid
    weights imply, including the fractional cell that x cuts through."""
    if x <= nodes[0]:
        return 0.0
    if x >= nodes[-1]:
        return float(weights.sum())
    coeff = np.full(len(nodes), h)
    coeff[0] = coeff[-1] = h / 2.0
    rho = weights / coeff
    k = min(int((x - nodes[0]) // h), len(nodes) - 2)
    mass = 0.0
    if k > 0:
        mass = h * (rho[0] / 2.0 + rho[1:k].sum() + rho[k] / 2.0)
    dx = x - nodes[k]
    rho_x = rho[k] + (rho[k + 1] - rho[k]) * dx / h
    return mass + dx * (rho[k] + rho_x) / 2.0


def mtd_probabilities(nodes, weights, config: ModelConfig) -> np.ndarray:
    """Per-dose posterior probability of being the MTD.

    On a uniform grid the region masses are integrated up to the exact
    region boundaries (cutting through grid cells); otherwise each node's
    weight is assigned to the MTD region containing it.
    """
    nodes = np.asarray(nodes, dtype=float)
    weights = np.asarray(weights, dtype=float)
    h = _uniform_spacing(nodes)
    if h is None:
        dose = _mtd_index_vec(nodes, config)
        return np.bincount(dose - 1, weights=weights, minlength=config.n_doses)
    cum = [_mass_below(nodes, weights, h, b) for b in _mtd_breakpoints(config)]
    edges = np.concatenate([[0.0], cum, [weights.sum()]])
    return np.maximum(np.diff(edges), 0.0)


def overtoxicity_probability(nodes, weights, config: ModelConfig) -> float:
    """Posterior probability that the lowest dose is above the target rate,
    i.e. the mass of {alpha < ln(ln target / ln p_1)}."""
    nodes = np.asarray(nodes, dtype=float)
    weights = np.asarray(weights, dtype=float)
    t = _overtox_threshold(config)
    h = _uniform_spacing(nodes)
    if h is None:
        theta1 = _theta(nodes, config)[:, 0]
        return float(weights[theta1 > config.target].sum())
    return float(min(1.0, max(0.0, _mass_below(nodes, weights, h, t))))

"""Monte Carlo study engine: simulate many trials under true toxicity
curves and aggregate the operating characteristics of each design."""
from __future__ import annotations

from dataclasses import dataclass
from math import sqrt

import numpy as np
from joblib import Parallel, delayed

from rcrm.engine import TrialConfig, TrialState, TrialStatus, record_outcomes, start_trial
from rcrm.model import DEFAULT_TARGET, ValidationError

__all__ = [
    "Scenario",
    "ScenarioResult",
    "make_scenario",
    "reference_scenarios",
    "simulate_trial",
    "run_study",
]


@dataclass(frozen=True)
class Scenario:
    """A true dose-toxicity curve against which designs are evaluated."""

    name: str
    true_probs: tuple[float, ...]
    true_mtd: int

    def __post_init__(self):
        object.__setattr__(self, "true_probs", tuple(float(p) for p in self.true_probs))
        if len(self.true_probs) == 0:
            raise ValidationError("true_probs must be nonempty")
        if any(not (0.0 < p < 1.0) for p in self.true_probs):
            raise ValidationError("true_probs must lie in the open interval (0, 1)")
        if any(a > b for a, b in zip(self.true_probs, self.true_probs[1:])):
            raise ValidationError("true_probs must be nondecreasing")
        if not 1 <= self.true_mtd <= len(self.true_probs):
            raise ValidationError("true_mtd out of dose range")


def make_scenario(name: str, true_probs, target: float = DEFAULT_TARGET) -> Scenario:
    """Build a scenario, deriving the true MTD as the dose whose true
    probability is closest to the target (ties to the lower dose)."""
    probs = np.asarray(tuple(true_probs), dtype=float)
    true_mtd = int(np.argmin(np.abs(probs - target))) + 1
    return Scenario(name=name, true_probs=tuple(true_probs), true_mtd=true_mtd)


def reference_scenarios() -> tuple[Scenario, ...]:
    """The six built-in curves used by the bundled operating-characteristic
    study, covering targets at the middle, edges, and steep/flat shapes."""
    table = [
        ("S1", (0.02, 0.05, 0.14, 0.30, 0.54, 0.76)),
        ("S2", (0.19, 0.30, 0.44, 0.59, 0.72, 0.83)),
        ("S3", (0.01, 0.03, 0.05, 0.10, 0.18, 0.30)),
        ("S4", (0.04, 0.11, 0.30, 0.59, 0.83, 0.94)),
        ("S5", (0.02, 0.04, 0.08, 0.16, 0.30, 0.49)),
        ("S6", (0.08, 0.14, 0.21, 0.30, 0.41, 0.54)),
    ]
    return tuple(make_scenario(name, probs) for name, probs in table)


@dataclass(frozen=True)
class ScenarioResult:
    """Aggregates over one scenario x design cell of the study."""

    n_trials: int
    selection_counts: tuple[int, ...]  # trials declaring each dose the MTD
    overtoxic_count: int               # trials stopped for overtoxicity
    total_dlts: int
    cohorts_at_mtd_hist: tuple[int, ...]  # index = cohorts at the true MTD

    def __post_init__(self):
        if sum(self.selection_counts) + self.overtoxic_count != self.n_trials:
            raise ValidationError("selection counts and stops must partition the trials")
        if sum(self.cohorts_at_mtd_hist) != self.n_trials:
            raise ValidationError("histogram mass must equal the trial count")

    @property
    def selection_probs(self) -> tuple[float, ...]:
        return tuple(c / self.n_trials for c in self.selection_counts)

    @property
    def overtoxic_prob(self) -> float:
        return self.overtoxic_count / self.n_trials

    @property
    def avg_dlts(self) -> float:
        return self.total_dlts / self.n_trials

    @property
    def mean_cohorts_at_mtd(self) -> float:
        total = sum(v * c for v, c in enumerate(self.cohorts_at_mtd_hist))
        return total / self.n_trials

    @property
    def sd_cohorts_at_mtd(self) -> float:
        mean = self.mean_cohorts_at_mtd
        sq = sum(v * v * c for v, c in enumerate(self.cohorts_at_mtd_hist))
        return sqrt(max(0.0, sq / self.n_trials - mean * mean))


def simulate_trial(config: TrialConfig, scenario: Scenario, rng) -> TrialState:
    """Run one trial to termination, drawing each cohort's outcomes as
    ordered subject-level Bernoulli draws against the true curve."""
    if len(scenario.true_probs) != config.n_doses:
        raise ValidationError("scenario dose count does not match the skeleton")
    state = start_trial(config)
    while state.status is TrialStatus.AWAITING_OUTCOMES:
        p = scenario.true_probs[state.current_dose - 1]
        dlt_count = int((rng.random(config.cohort_size) < p).sum())
        state = record_outcomes(state, dlt_count, rng)
    return state


def _trial_rng(master_seed: int, trial_index: int) -> np.random.Generator:
    # substream keyed on (master_seed, trial index): platform-independent
    # and immune to execution-order changes under parallelism
    return np.random.default_rng(np.random.SeedSequence(entropy=(master_seed, trial_index)))


def _trial_summary(config: TrialConfig, scenario: Scenario, master_seed: int, i: int):
    state = simulate_trial(config, scenario, _trial_rng(master_seed, i))
    at_mtd = sum(
        1 for c in state.cohorts
        if c.dose == scenario.true_mtd and c.dlt_count is not None
    )
    return state.final_mtd, state.total_dlts, at_mtd


def run_study(
    config: TrialConfig,
    scenario: Scenario,
    n_trials: int,
    master_seed: int,
    n_jobs: int = 1,
) -> ScenarioResult:
    """Simulate n_trials independent trials and aggregate them.

    Trial i always uses the substream derived from (master_seed, i) and the
    summaries are integer counts merged in trial order, so the result is
    bit-identical for any n_jobs.
    """
    if n_trials < 1:
        raise ValidationError("n_trials must be at least 1")
    if n_jobs == 1:
        summaries = [
            _trial_summary(config, scenario, master_seed, i) for i in range(n_trials)
        ]
    else:
        summaries = Parallel(n_jobs=n_jobs)(
            delayed(_trial_summary)(config, scenario, master_seed, i)
            for i in range(n_trials)
        )
    selection = [0] * config.n_doses
    overtoxic = 0
    total_dlts = 0
    hist = [0] * (config.n_cohorts + 1)
    for final_mtd, dlts, at_mtd in summaries:
        if final_mtd is None:
            overtoxic += 1
        else:
            selection[final_mtd - 1] += 1
        total_dlts += dlts
        hist[at_mtd] += 1
    return ScenarioResult(
        n_trials=n_trials,
        selection_counts=tuple(selection),
        overtoxic_count=overtoxic,
        total_dlts=total_dlts,
        cohorts_at_mtd_hist=tuple(hist),
    )

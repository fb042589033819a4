"""Single-trial state machine: cohort enrollment, outcome incorporation,
posterior refresh, dose decision, and termination.

States are immutable; every transition returns a new state. Replaying the
same outcome sequence with the same seeded stream reproduces the same
states, which is what the conduct service's persistence relies on.
"""
from __future__ import annotations

import numbers
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from rcrm.decisions import DecisionKind, DesignVariant, DoseDecision, decide
from rcrm.model import (
    ModelConfig,
    ObservationSet,
    Posterior,
    ValidationError,
    compute_posterior,
)

__all__ = [
    "StateError",
    "TrialConfig",
    "TrialStatus",
    "CohortRecord",
    "TrialState",
    "start_trial",
    "record_outcomes",
    "cohorts_at_dose",
    "replay_outcomes",
]


class StateError(RuntimeError):
    """Raised when a transition is attempted from the wrong state."""


class TrialStatus(str, Enum):
    AWAITING_OUTCOMES = "awaiting_outcomes"
    COMPLETED = "completed"
    STOPPED_OVERTOXIC = "stopped_overtoxic"


@dataclass(frozen=True)
class TrialConfig:
    model: ModelConfig = ModelConfig()
    variant: DesignVariant = DesignVariant.CRM
    cohort_size: int = 3
    max_subjects: int = 45
    pi: float = 0.90

    def __post_init__(self):
        if not (isinstance(self.cohort_size, numbers.Integral) and self.cohort_size >= 1):
            raise ValidationError("cohort_size must be a positive integer")
        if not (isinstance(self.max_subjects, numbers.Integral) and self.max_subjects >= 1):
            raise ValidationError("max_subjects must be a positive integer")
        if self.max_subjects % self.cohort_size != 0:
            raise ValidationError("max_subjects must be divisible by cohort_size")
        if not 0.0 < self.pi < 1.0:
            raise ValidationError("pi must lie in the open interval (0, 1)")
        if not isinstance(self.variant, DesignVariant):
            object.__setattr__(self, "variant", DesignVariant.parse(self.variant))

    @property
    def n_cohorts(self) -> int:
        return self.max_subjects // self.cohort_size

    @property
    def n_doses(self) -> int:
        return self.model.n_doses


@dataclass(frozen=True)
class CohortRecord:
    index: int  # 1-based cohort counter
    dose: int
    dlt_count: int | None  # None until outcomes are recorded
    decision: DoseDecision


@dataclass(frozen=True, eq=False)
class TrialState:
    config: TrialConfig
    cohorts: tuple[CohortRecord, ...]
    observations: ObservationSet
    posterior: Posterior
    status: TrialStatus
    final_mtd: int | None = None

    @property
    def d_max(self) -> int:
        return max(c.dose for c in self.cohorts)

    @property
    def current_dose(self) -> int:
        return self.cohorts[-1].dose

    @property
    def total_subjects(self) -> int:
        return self.config.cohort_size * sum(1 for c in self.cohorts if c.dlt_count is not None)

    @property
    def total_dlts(self) -> int:
        return sum(c.dlt_count for c in self.cohorts if c.dlt_count is not None)


def start_trial(config: TrialConfig) -> TrialState:
    """Open the trial with its first cohort at the lowest dose."""
    baseline = DoseDecision(kind=DecisionKind.ASSIGN, dose=1, randomized=False)
    return TrialState(
        config=config,
        cohorts=(CohortRecord(index=1, dose=1, dlt_count=None, decision=baseline),),
        observations=ObservationSet.empty(config.n_doses),
        posterior=compute_posterior(ObservationSet.empty(config.n_doses), config.model),
        status=TrialStatus.AWAITING_OUTCOMES,
    )


def record_outcomes(state: TrialState, dlt_count: int, rng=None) -> TrialState:
    """Fold one cohort's DLT count into the trial and advance it.

    The safety stop is evaluated first on the refreshed posterior; then
    sample-size exhaustion completes the trial with the unconstrained
    closest-to-target dose as the declared MTD; otherwise the design
    variant picks the next cohort's dose, drawing any randomization from
    the caller's stream.
    """
    if state.status is not TrialStatus.AWAITING_OUTCOMES:
        raise StateError("trial is not awaiting outcomes")
    m = state.config.cohort_size
    if not (isinstance(dlt_count, numbers.Integral) and 0 <= dlt_count <= m):
        raise StateError(f"dlt_count must be an integer in 0..{m}")

    open_cohort = state.cohorts[-1]
    closed = replace(open_cohort, dlt_count=int(dlt_count))
    cohorts = state.cohorts[:-1] + (closed,)
    obs = state.observations.add(closed.dose, m, int(dlt_count))
    post = compute_posterior(obs, state.config.model)

    if post.p_overtoxic > state.config.pi:
        return TrialState(
            config=state.config, cohorts=cohorts, observations=obs,
            posterior=post, status=TrialStatus.STOPPED_OVERTOXIC,
        )
    if len(cohorts) == state.config.n_cohorts:
        # declaration ignores the no-skip cap; that rule only governs assignment
        final = int(np.argmin(np.abs(post.dose_means - state.config.model.target))) + 1
        return TrialState(
            config=state.config, cohorts=cohorts, observations=obs,
            posterior=post, status=TrialStatus.COMPLETED, final_mtd=final,
        )
    decision = decide(
        state.config.variant, post, d_prev=closed.dose,
        d_max=max(c.dose for c in cohorts), config=state.config.model,
        pi=state.config.pi, rng=rng,
    )
    nxt = CohortRecord(
        index=closed.index + 1, dose=decision.dose, dlt_count=None, decision=decision
    )
    return TrialState(
        config=state.config, cohorts=cohorts + (nxt,), observations=obs,
        posterior=post, status=TrialStatus.AWAITING_OUTCOMES,
    )


def cohorts_at_dose(state: TrialState, dose: int) -> int:
    """Number of completed cohorts treated at the given dose."""
    return sum(1 for c in state.cohorts if c.dose == dose and c.dlt_count is not None)


def replay_outcomes(config: TrialConfig, dlt_counts, rng=None) -> TrialState:
    """Run a fresh trial through a recorded outcome sequence.

    With the rng seeded as in the original run, every randomized decision
    draws the same value, so the resulting state is identical.
    """
    state = start_trial(config)
    for k in dlt_counts:
        state = record_outcomes(state, k, rng)
    return state

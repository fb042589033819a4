"""Dose-assignment rules: the CRM recommendation, the no-skip escalation
constraint, the overtoxicity stop, and the two randomized reassignment
schemes (rCRM1 neighborhood, rCRM2 prefix)."""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from rcrm.model import ModelConfig, Posterior, ValidationError

__all__ = [
    "DesignVariant",
    "DecisionKind",
    "DoseDecision",
    "constrained_estimate",
    "crm_decide",
    "rcrm1_decide",
    "rcrm2_decide",
    "decide",
]


class DesignVariant(str, Enum):
    CRM = "CRM"
    RCRM1 = "RCRM1"
    RCRM2 = "RCRM2"

    @classmethod
    def parse(cls, text: str) -> "DesignVariant":
        try:
            return cls(str(text).strip().upper())
        except ValueError:
            raise ValidationError(
                f"unknown design variant {text!r}; expected one of CRM, RCRM1, RCRM2"
            ) from None


class DecisionKind(str, Enum):
    STOP = "stop"
    ASSIGN = "assign"


@dataclass(frozen=True)
class DoseDecision:
    """One dose decision with full randomization provenance for audit."""

    kind: DecisionKind
    dose: int | None = None
    randomized: bool = False
    candidate_doses: tuple[int, ...] = ()
    candidate_probs: tuple[float, ...] = ()
    random_draw: float | None = None

    def __post_init__(self):
        if self.kind is DecisionKind.ASSIGN and self.dose is None:
            raise ValidationError("assign decision requires a dose")
        if self.kind is DecisionKind.STOP and self.dose is not None:
            raise ValidationError("stop decision carries no dose")
        if self.randomized:
            if self.random_draw is None or not 0.0 <= self.random_draw < 1.0:
                raise ValidationError("randomized decision requires a draw in [0, 1)")
            if abs(sum(self.candidate_probs) - 1.0) > 1e-12:
                raise ValidationError("candidate probabilities must sum to 1")
            if self.dose not in self.candidate_doses:
                raise ValidationError("assigned dose must be one of the candidates")

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "dose": self.dose,
            "randomized": self.randomized,
            "candidate_doses": list(self.candidate_doses),
            "candidate_probs": list(self.candidate_probs),
            "random_draw": self.random_draw,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DoseDecision":
        return cls(
            kind=DecisionKind(d["kind"]),
            dose=d.get("dose"),
            randomized=bool(d.get("randomized", False)),
            candidate_doses=tuple(d.get("candidate_doses") or ()),
            candidate_probs=tuple(d.get("candidate_probs") or ()),
            random_draw=d.get("random_draw"),
        )


def constrained_estimate(posterior: Posterior, d_max: int, config: ModelConfig) -> int:
    """Dose whose mean toxicity is closest to target, capped at d_max + 1.

    The cap enforces that escalation never skips an untried level; the cap
    at the top of the dose range is implied by dose existence.
    """
    if not 1 <= d_max <= config.n_doses:
        raise ValidationError(f"d_max {d_max} out of range 1..{config.n_doses}")
    est = int(np.argmin(np.abs(posterior.dose_means - config.target))) + 1
    return min(est, d_max + 1, config.n_doses)


def _stop(posterior: Posterior, pi: float) -> bool:
    return posterior.p_overtoxic > pi


def _plain_assign(dose: int) -> DoseDecision:
    return DoseDecision(kind=DecisionKind.ASSIGN, dose=dose, randomized=False)


def _randomized_assign(
    candidates: list[int], posterior: Posterior, d_prev: int, rng
) -> DoseDecision:
    raw = np.array([posterior.mtd_probs[c - 1] for c in candidates], dtype=float)
    total = raw.sum()
    if total <= 0.0:
        # all candidate mass vanished; stay rather than draw from nothing
        return _plain_assign(d_prev)
    probs = raw / total
    draw = float(rng.random())
    # inverse CDF over candidates in ascending dose order
    idx = int(np.searchsorted(np.cumsum(probs), draw, side="right"))
    idx = min(idx, len(candidates) - 1)  # guard: cumulative sum rounding below 1
    return DoseDecision(
        kind=DecisionKind.ASSIGN,
        dose=candidates[idx],
        randomized=True,
        candidate_doses=tuple(candidates),
        candidate_probs=tuple(probs.tolist()),
        random_draw=draw,
    )


def crm_decide(
    posterior: Posterior, d_prev: int, d_max: int, config: ModelConfig, pi: float
) -> DoseDecision:
    """Assign the constrained estimate, or stop on overtoxicity."""
    if _stop(posterior, pi):
        return DoseDecision(kind=DecisionKind.STOP)
    return _plain_assign(constrained_estimate(posterior, d_max, config))


def rcrm1_decide(
    posterior: Posterior, d_prev: int, d_max: int, config: ModelConfig, pi: float, rng
) -> DoseDecision:
    """Like the CRM, but when the recommendation repeats the previous dose,
    draw the next dose from {d_prev - 1, d_prev, d_prev + 1} with
    probabilities proportional to the posterior MTD probabilities.
    Out-of-range neighbors contribute zero mass and are dropped."""
    if _stop(posterior, pi):
        return DoseDecision(kind=DecisionKind.STOP)
    d_star = constrained_estimate(posterior, d_max, config)
    if d_star != d_prev:
        return _plain_assign(d_star)
    candidates = [d for d in (d_prev - 1, d_prev, d_prev + 1) if 1 <= d <= config.n_doses]
    return _randomized_assign(candidates, posterior, d_prev, rng)


def rcrm2_decide(
    posterior: Posterior, d_prev: int, d_max: int, config: ModelConfig, pi: float, rng
) -> DoseDecision:
    """Like the CRM, but when the recommendation repeats the previous dose,
    draw the next dose from every level up to min(d_max + 1, D) with
    probabilities proportional to the posterior MTD probabilities."""
    if _stop(posterior, pi):
        return DoseDecision(kind=DecisionKind.STOP)
    d_star = constrained_estimate(posterior, d_max, config)
    if d_star != d_prev:
        return _plain_assign(d_star)
    candidates = list(range(1, min(d_max + 1, config.n_doses) + 1))
    return _randomized_assign(candidates, posterior, d_prev, rng)


def decide(
    variant: DesignVariant,
    posterior: Posterior,
    d_prev: int,
    d_max: int,
    config: ModelConfig,
    pi: float,
    rng,
) -> DoseDecision:
    if variant is DesignVariant.CRM:
        return crm_decide(posterior, d_prev, d_max, config, pi)
    if variant is DesignVariant.RCRM1:
        return rcrm1_decide(posterior, d_prev, d_max, config, pi, rng)
    if variant is DesignVariant.RCRM2:
        return rcrm2_decide(posterior, d_prev, d_max, config, pi, rng)
    raise ValidationError(f"unknown design variant {variant!r}")

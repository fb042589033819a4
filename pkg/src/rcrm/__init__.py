"""Dose-escalation engine and simulator for the continual reassessment
method (CRM) and its randomized variants (rCRM1, rCRM2)."""

from rcrm.decisions import (
    DecisionKind,
    DesignVariant,
    DoseDecision,
    constrained_estimate,
    crm_decide,
    decide,
    rcrm1_decide,
    rcrm2_decide,
)
from rcrm.engine import (
    CohortRecord,
    StateError,
    TrialConfig,
    TrialState,
    TrialStatus,
    cohorts_at_dose,
    record_outcomes,
    replay_outcomes,
    start_trial,
)
from rcrm.estimator import CrmEstimator
from rcrm.model import (
    DEFAULT_SKELETON,
    DEFAULT_TARGET,
    ModelConfig,
    ObservationSet,
    Posterior,
    ValidationError,
    compute_posterior,
    dlt_probability,
    log_likelihood,
    mtd_index,
    mtd_probabilities,
    overtoxicity_probability,
)
from rcrm.simulate import (
    Scenario,
    ScenarioResult,
    make_scenario,
    reference_scenarios,
    run_study,
    simulate_trial,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "DEFAULT_SKELETON",
    "DEFAULT_TARGET",
    "ModelConfig",
    "ObservationSet",
    "Posterior",
    "ValidationError",
    "compute_posterior",
    "dlt_probability",
    "log_likelihood",
    "mtd_index",
    "mtd_probabilities",
    "overtoxicity_probability",
    "DecisionKind",
    "DesignVariant",
    "DoseDecision",
    "constrained_estimate",
    "crm_decide",
    "decide",
    "rcrm1_decide",
    "rcrm2_decide",
    "CohortRecord",
    "StateError",
    "TrialConfig",
    "TrialState",
    "TrialStatus",
    "cohorts_at_dose",
    "record_outcomes",
    "replay_outcomes",
    "start_trial",
    "CrmEstimator",
    "Scenario",
    "ScenarioResult",
    "make_scenario",
    "reference_scenarios",
    "run_study",
    "simulate_trial",
]

"""Simulation and closed-form analysis of multiserver queues with setup times.

The package has three layers: exact/approximate formulas for queue lengths
and waits (analytic), a discrete-event simulator with regeneration-cycle
instrumentation (simengine, estimate), and a claim-check suite that pits
the formulas against independent Monte-Carlo estimates (oracles). provision
answers sizing questions on top of either layer; cli exposes everything as
a command-line tool.
"""

from .analytic import (
    BoundConstants,
    BoundsReport,
    DEFAULT_CONSTANTS,
    bounds_report,
    busy_period_integral,
    busy_period_length,
    catalan_hitting_pmf,
    erlang_c_delay_probability,
    erlang_c_wait,
    hitting_tail_lower,
    hitting_tail_upper,
    mminf_passage_mean,
    q_approx,
    q_low_r,
    q_lower,
    q_lower_mpolicy,
    q_upper,
    stopped_busy_mean_upper,
    tightness_simplified,
    welch_mm1_setup_wait,
)
from .errors import (
    HypothesisViolated,
    InsufficientReplications,
    InvariantViolation,
    ParameterError,
    SetupQueueError,
    SimulationError,
    Unachievable,
    UnstableLoad,
)
from .estimate import (
    EstimatePair,
    SimEstimate,
    collect_renewal_cycles,
    estimate,
    relative_error,
)
from .model import (
    AssumptionRegion,
    DeterministicSetup,
    ExponentialSetup,
    NoSetup,
    SystemParams,
    in_assumption_region,
    policy_label,
    validate,
)
from .oracles import OracleVerdict, run_verification
from .provision import (
    ProvisionResult,
    min_servers_exponential_sim,
    min_servers_for_wait,
    predicted_wait,
    provisioning_table,
    solve_provision,
)
from .simengine import (
    CycleStats,
    ReplicationResult,
    SimConfig,
    assert_sample_path_invariants,
    run_renewal_cycles,
    run_replication,
)

__version__ = "0.1.0"

__all__ = [
    "AssumptionRegion",
    "BoundConstants",
    "BoundsReport",
    "CycleStats",
    "DEFAULT_CONSTANTS",
    "DeterministicSetup",
    "EstimatePair",
    "ExponentialSetup",
    "HypothesisViolated",
    "InsufficientReplications",
    "InvariantViolation",
    "NoSetup",
    "OracleVerdict",
    "ParameterError",
    "ProvisionResult",
    "ReplicationResult",
    "SetupQueueError",
    "SimConfig",
    "SimEstimate",
    "SimulationError",
    "SystemParams",
    "Unachievable",
    "UnstableLoad",
    "assert_sample_path_invariants",
    "bounds_report",
    "busy_period_integral",
    "busy_period_length",
    "catalan_hitting_pmf",
    "collect_renewal_cycles",
    "erlang_c_delay_probability",
    "erlang_c_wait",
    "estimate",
    "hitting_tail_lower",
    "hitting_tail_upper",
    "in_assumption_region",
    "min_servers_exponential_sim",
    "min_servers_for_wait",
    "mminf_passage_mean",
    "policy_label",
    "predicted_wait",
    "provisioning_table",
    "q_approx",
    "q_low_r",
    "q_lower",
    "q_lower_mpolicy",
    "q_upper",
    "relative_error",
    "run_renewal_cycles",
    "run_replication",
    "run_verification",
    "solve_provision",
    "stopped_busy_mean_upper",
    "tightness_simplified",
    "validate",
    "welch_mm1_setup_wait",
    "__version__",
]

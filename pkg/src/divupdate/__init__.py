"""Divergence-optimal updates of a partitioned prior, with a brute-force certifier."""

from .divergence import (
    QUADRATIC,
    ConvexPotential,
    bregman,
    hellinger_sq,
    hellinger_sq_halfsquares,
    is_strictly_convex,
    quadratic_bregman,
    shannon_entropy,
)
from .exceptions import (
    BlockTooLarge,
    DegenerateConditional,
    DegeneratePriorConditional,
    DimensionMismatch,
    DivUpdateError,
    EmptyRefinedBlock,
    InfeasibleEvidence,
    InvalidProblem,
    NonConvergence,
    SupportViolation,
    ZeroProbabilityBlock,
    ZeroProbabilityEvent,
)
from .oracle import Objective, OracleConfig, OracleMethod, oracle_certify, oracle_minimize
from .space import (
    BlockStats,
    EmpiricalEvidence,
    Event,
    PartitionedPrior,
    block_stats,
    conditional_expectation,
    empirical_expectation,
    event_probability,
    refine_by_event,
    refine_evidence,
    validate,
)
from .update import (
    ExistenceMode,
    Method,
    UpdateResult,
    bregman_feasibility,
    bregman_global_pythagoras,
    bregman_pythagoras,
    bregman_update,
    compare_updates,
    conditional_bregman_update,
    conditional_hellinger_update,
    existence_update,
    hellinger_pythagoras,
    hellinger_update,
)

__version__ = "0.1.0"

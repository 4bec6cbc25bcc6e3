"""PAC learning from weak oracles: one-inclusion-graph walks, boosting, and
the reductions that carry the binary weak learner to agnostic, multiclass and
real-valued problems."""

from .core import (
    STAR,
    ContractViolation,
    FiniteDistribution,
    RandomStream,
    Sample,
    empirical_error,
    loss_abs,
    loss_bin,
    loss_mc,
)
from .oracle import (
    ConsistencyOracle,
    ErmValueOracle,
    OracleCapabilityError,
    QueryCostLedger,
    RangeConsistencyOracle,
)

__all__ = [
    "STAR",
    "ContractViolation",
    "FiniteDistribution",
    "RandomStream",
    "Sample",
    "empirical_error",
    "loss_abs",
    "loss_bin",
    "loss_mc",
    "ConsistencyOracle",
    "ErmValueOracle",
    "OracleCapabilityError",
    "QueryCostLedger",
    "RangeConsistencyOracle",
]

"""Oracle interfaces over concept classes, with cumulative query-cost accounting.

Learning algorithms never touch a concept class directly: they hold one of the
oracle handles below, which answer a single bit (consistency, range
consistency), a scalar (ERM value), or a hypothesis (strong ERM), and charge a
shared ledger by the number of examples in each query.
"""

from __future__ import annotations

import threading
from fractions import Fraction

from .core import STAR, BINARY_LABELS, ContractViolation, Sample

# capability tags a concept class may advertise
CONSISTENCY = "consistency"
ERM_VALUE = "erm_value"
RANGE_CONSISTENCY = "range_consistency"
STRONG_ERM = "strong_erm"


class OracleCapabilityError(RuntimeError):
    """The concept class does not implement the requested oracle."""


class QueryCostLedger:
    """Running totals of oracle calls and cumulative query cost.

    Cost is the sum of input sizes (number of examples per call); increments
    are atomic so concurrent workers may share one ledger.
    """

    def __init__(self):
        self._lock = threading.Lock()
        self.total_cost = 0
        self.call_count = 0

    def charge(self, size: int):
        if size < 0:
            raise ContractViolation("query size cannot be negative")
        with self._lock:
            self.total_cost += size
            self.call_count += 1

    def snapshot(self) -> tuple[int, int]:
        with self._lock:
            return self.total_cost, self.call_count

    def __repr__(self):
        return f"QueryCostLedger(cost={self.total_cost}, calls={self.call_count})"


class ConceptClass:
    """Base for concept classes; subclasses advertise the oracles they implement."""

    capabilities: frozenset = frozenset()

    def require(self, capability: str):
        if capability not in self.capabilities:
            raise OracleCapabilityError(
                f"{type(self).__name__} does not implement the {capability} oracle"
            )

    # raw per-class implementations; only the advertised ones are overridden
    def consistent_on(self, xs: tuple, ys: tuple) -> bool:
        raise OracleCapabilityError(f"{type(self).__name__}: no consistency oracle")

    def erm_value_on(self, xs: tuple, ys: tuple, loss) -> Fraction:
        raise OracleCapabilityError(f"{type(self).__name__}: no weak ERM oracle")

    def range_consistent_on(self, xs: tuple, lower: tuple, upper: tuple) -> bool:
        raise OracleCapabilityError(f"{type(self).__name__}: no range consistency oracle")

    def erm_hypothesis(self, sample: Sample, loss):
        raise OracleCapabilityError(f"{type(self).__name__}: no strong ERM oracle")


def _split_pairs(sample) -> tuple[tuple, tuple]:
    pairs = sample.pairs if isinstance(sample, Sample) else tuple(sample)
    xs = tuple(x for x, _ in pairs)
    ys = tuple(y for _, y in pairs)
    return xs, ys


def _check_binary_labels(ys):
    for y in ys:
        if y is STAR:
            raise ContractViolation("consistency queries must not contain * labels")
        if y not in BINARY_LABELS and not isinstance(y, int):
            raise ContractViolation(f"unexpected query label {y!r}")


def query_consistency(concept_class: ConceptClass, sample, ledger: QueryCostLedger) -> bool:
    """Single-bit oracle: is the sample realizable by the class?"""
    concept_class.require(CONSISTENCY)
    xs, ys = _split_pairs(sample)
    _check_binary_labels(ys)
    ledger.charge(len(xs))
    return concept_class.consistent_on(xs, ys)


def query_erm_value(concept_class: ConceptClass, sample, loss, ledger: QueryCostLedger) -> Fraction:
    """Value-only oracle: the minimum empirical loss over the class, exact."""
    concept_class.require(ERM_VALUE)
    xs, ys = _split_pairs(sample)
    if len(xs) == 0:
        raise ContractViolation("ERM value of an empty sample is undefined")
    ledger.charge(len(xs))
    return concept_class.erm_value_on(xs, ys, loss)


def query_range_consistency(concept_class: ConceptClass, triples, ledger: QueryCostLedger) -> bool:
    """Is there a hypothesis with lower_i <= h(x_i) <= upper_i for all i?"""
    concept_class.require(RANGE_CONSISTENCY)
    triples = tuple(triples)
    xs = tuple(t[0] for t in triples)
    lower = tuple(Fraction(t[1]) for t in triples)
    upper = tuple(Fraction(t[2]) for t in triples)
    for lo, hi in zip(lower, upper):
        if lo > hi:
            raise ContractViolation(f"empty range [{lo}, {hi}] in range query")
        if lo < 0 or hi > 1:
            raise ContractViolation("range endpoints must lie in [0,1]")
    ledger.charge(len(xs))
    return concept_class.range_consistent_on(xs, lower, upper)


def query_strong_erm(concept_class: ConceptClass, sample, loss, ledger: QueryCostLedger):
    """Return an evaluable empirical risk minimizer (lowest table index on ties)."""
    concept_class.require(STRONG_ERM)
    sample = sample if isinstance(sample, Sample) else Sample(sample)
    if len(sample) == 0:
        raise ContractViolation("strong ERM of an empty sample is undefined")
    ledger.charge(len(sample))
    return concept_class.erm_hypothesis(sample, loss)


class ConsistencyOracle:
    """Callable handle binding a class's consistency oracle to a ledger."""

    def __init__(self, concept_class: ConceptClass, ledger: QueryCostLedger):
        concept_class.require(CONSISTENCY)
        self.concept_class = concept_class
        self.ledger = ledger

    def __call__(self, sample) -> bool:
        return query_consistency(self.concept_class, sample, self.ledger)

    def on_labels(self, xs: tuple, ys: tuple) -> bool:
        """Fast path for a fixed point sequence with varying labels."""
        self.ledger.charge(len(xs))
        return self.concept_class.consistent_on(xs, ys)


class ErmValueOracle:
    """Callable handle for the value-only ERM oracle under a fixed loss."""

    def __init__(self, concept_class: ConceptClass, loss, ledger: QueryCostLedger):
        concept_class.require(ERM_VALUE)
        self.concept_class = concept_class
        self.loss = loss
        self.ledger = ledger

    def __call__(self, sample) -> Fraction:
        return query_erm_value(self.concept_class, sample, self.loss, self.ledger)

    def unnormalized(self, sample) -> Fraction:
        """Minimum loss *sum* over the class, reconstructed exactly from the mean."""
        sample = sample if isinstance(sample, Sample) else Sample(sample)
        return self(sample) * len(sample)


class RangeConsistencyOracle:
    def __init__(self, concept_class: ConceptClass, ledger: QueryCostLedger):
        concept_class.require(RANGE_CONSISTENCY)
        self.concept_class = concept_class
        self.ledger = ledger

    def __call__(self, triples) -> bool:
        return query_range_consistency(self.concept_class, triples, self.ledger)

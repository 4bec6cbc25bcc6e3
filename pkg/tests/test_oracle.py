from fractions import Fraction

import numpy as np
import pytest

from oiglearn.brute import brute_erm
from oiglearn.classes import FiniteTableClass, HPrimeClass
from oiglearn.core import STAR, ContractViolation, Sample, loss_bin
from oiglearn.oracle import (
    ConsistencyOracle,
    ErmValueOracle,
    OracleCapabilityError,
    QueryCostLedger,
    query_consistency,
    query_erm_value,
    query_range_consistency,
    query_strong_erm,
)


def _zero_class():
    return FiniteTableClass(("a", "b"), [(0, 0)], "binary")


def _random_class(gen, points=4, hyps=6):
    rows = set()
    while len(rows) < hyps:
        rows.add(tuple(int(v) for v in gen.integers(0, 2, size=points)))
    return FiniteTableClass(tuple(range(points)), sorted(rows), "binary")


def test_consistency_examples():
    ledger = QueryCostLedger()
    cls = _zero_class()
    assert query_consistency(cls, Sample([]), ledger) is True
    assert query_consistency(cls, Sample([("a", 0)]), ledger) is True
    assert query_consistency(cls, Sample([("a", 0), ("a", 1)]), ledger) is False


def test_consistency_rejects_star_queries():
    ledger = QueryCostLedger()
    with pytest.raises(ContractViolation):
        query_consistency(_zero_class(), Sample([("a", STAR)]), ledger)


def test_erm_value_examples():
    ledger = QueryCostLedger()
    cls = _zero_class()
    assert query_erm_value(cls, Sample([("a", 0)]), loss_bin, ledger) == 0
    s = Sample([("a", 0), ("b", 1), ("a", 0)])
    assert query_erm_value(cls, s, loss_bin, ledger) == Fraction(1, 3)
    with pytest.raises(ContractViolation):
        query_erm_value(cls, Sample([]), loss_bin, ledger)


def test_erm_contradictory_duplicates_cost_half():
    gen = np.random.default_rng(3)
    for _ in range(20):
        cls = _random_class(gen)
        s = Sample([(0, 0), (0, 1)])
        assert query_erm_value(cls, s, loss_bin, QueryCostLedger()) >= Fraction(1, 2)


def test_range_consistency_examples():
    ledger = QueryCostLedger()
    half = FiniteTableClass(("x",), [(Fraction(1, 2),)], "real")
    assert query_range_consistency(half, [("x", 0, 1)], ledger) is True
    assert query_range_consistency(half, [("x", Fraction(3, 5), Fraction(9, 10))], ledger) is False
    assert query_range_consistency(half, [("x", Fraction(1, 2), Fraction(1, 2))], ledger) is True
    with pytest.raises(ContractViolation):
        query_range_consistency(half, [("x", Fraction(2, 3), Fraction(1, 3))], ledger)


def test_strong_erm_examples():
    ledger = QueryCostLedger()
    cls = FiniteTableClass(("a", "b", "c"), [(0, 0, 0), (1, 1, 1)], "binary")
    realizable = Sample([("a", 0), ("b", 0)])
    h = query_strong_erm(cls, realizable, loss_bin, ledger)
    assert all(h(x) == y for x, y in realizable)
    # errors (1/3, 2/3): the first row wins
    s = Sample([("a", 0), ("b", 0), ("c", 1)])
    h = query_strong_erm(cls, s, loss_bin, ledger)
    assert h.index == 0
    single = FiniteTableClass(("a",), [(1,)], "binary")
    assert query_strong_erm(single, Sample([("a", 0)]), loss_bin, ledger).index == 0


def test_capability_errors():
    hp = HPrimeClass(bound=100)
    ledger = QueryCostLedger()
    with pytest.raises(OracleCapabilityError):
        query_strong_erm(hp, Sample([(6, 1)]), loss_bin, ledger)
    with pytest.raises(OracleCapabilityError):
        query_erm_value(hp, Sample([(6, 1)]), loss_bin, ledger)
    with pytest.raises(OracleCapabilityError):
        ErmValueOracle(hp, loss_bin, ledger)


def test_ledger_additivity():
    ledger = QueryCostLedger()
    cls = _zero_class()
    sizes = [1, 3, 2, 5, 1]
    for k in sizes:
        query_consistency(cls, Sample([("a", 0)] * k), ledger)
    assert ledger.total_cost == sum(sizes)
    assert ledger.call_count == len(sizes)
    assert ledger.total_cost >= ledger.call_count


def test_consistency_equals_zero_erm():
    gen = np.random.default_rng(11)
    for _ in range(100):
        cls = _random_class(gen, points=4, hyps=int(gen.integers(1, 8)))
        n = int(gen.integers(1, 7))
        sample = Sample(
            (int(gen.integers(0, 4)), int(gen.integers(0, 2))) for _ in range(n)
        )
        ledger = QueryCostLedger()
        con = query_consistency(cls, sample, ledger)
        erm = query_erm_value(cls, sample, loss_bin, ledger)
        assert con == (erm == 0)


def test_consistency_monotone_under_extension():
    gen = np.random.default_rng(13)
    for _ in range(100):
        cls = _random_class(gen)
        n = int(gen.integers(1, 6))
        pairs = [(int(gen.integers(0, 4)), int(gen.integers(0, 2))) for _ in range(n)]
        ledger = QueryCostLedger()
        before = query_consistency(cls, Sample(pairs), ledger)
        extended = pairs + [(int(gen.integers(0, 4)), int(gen.integers(0, 2)))]
        after = query_consistency(cls, Sample(extended), ledger)
        assert not (after and not before)


def test_oracle_handles_charge_ledger():
    ledger = QueryCostLedger()
    con = ConsistencyOracle(_zero_class(), ledger)
    con.on_labels(("a", "b"), (0, 0))
    con(Sample([("a", 0)]))
    assert ledger.snapshot() == (3, 2)


def test_strong_erm_matches_brute_minimizer():
    gen = np.random.default_rng(17)
    for _ in range(50):
        cls = _random_class(gen)
        n = int(gen.integers(1, 6))
        sample = Sample(
            (int(gen.integers(0, 4)), int(gen.integers(0, 2))) for _ in range(n)
        )
        h = query_strong_erm(cls, sample, loss_bin, QueryCostLedger())
        value, winners = brute_erm(cls, sample, loss_bin)
        assert h.index == winners[0]

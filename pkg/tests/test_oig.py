import math
from fractions import Fraction

import numpy as np
import pytest

from oiglearn.classes import FiniteTableClass
from oiglearn.core import ContractViolation, RandomStream
from oiglearn.oig import (
    MembershipPredicate,
    WalkParams,
    default_horizon,
    estimate_potential,
    exact_generating_function,
    exact_truncated_flip_expectation,
    flip,
    lazy_discount,
    orientation_probability,
    out_degree,
    pack,
    random_flip_step,
    recursion_residual,
    rollout_hitting_time,
    unpack,
)
from oiglearn.oracle import ConsistencyOracle, QueryCostLedger


def test_flip_and_packing():
    assert flip((0, 0), 1) == (0, 1)
    assert flip((1,), 0) == (0,)
    for code in range(16):
        assert pack(unpack(code, 4)) == code


def test_random_flip_step_m1_deterministic():
    gen = RandomStream(1).generator()
    assert random_flip_step((0,), gen) == (1,)


def test_random_flip_step_uniform_over_neighbors():
    gen = RandomStream(2).generator()
    m, steps = 5, 10_000
    v = (0,) * m
    counts = np.zeros(m)
    for _ in range(steps):
        w = random_flip_step(v, gen)
        counts[[i for i in range(m) if w[i] != v[i]][0]] += 1
    sigma = math.sqrt((1 / m) * (1 - 1 / m) / steps)
    assert np.all(np.abs(counts / steps - 1 / m) < 5 * sigma)


def test_rollout_hitting_time_examples():
    gen = RandomStream(3).generator()
    outside = MembershipPredicate.from_set([(1, 1)], 2)
    assert rollout_hitting_time((0, 0), outside, 10, gen) == 0
    full = MembershipPredicate.from_set([unpack(c, 2) for c in range(4)], 2)
    assert rollout_hitting_time((0, 0), full, 7, gen) == 7
    single = MembershipPredicate.from_set([(0,)], 1)
    assert rollout_hitting_time((0,), single, 10, gen) == 1


def test_estimate_potential_outside_is_exactly_one():
    gen = RandomStream(4).generator()
    pred = MembershipPredicate.from_set([(1, 1)], 2)
    est = estimate_potential(None, (0, 0), WalkParams(0.5, 8, 100), None, gen, membership=pred)
    assert est.value == 1.0
    assert est.trials == 100


def test_estimate_potential_full_cube_truncates():
    gen = RandomStream(5).generator()
    m, L = 3, 6
    pred = MembershipPredicate.from_set([unpack(c, m) for c in range(8)], m)
    est = estimate_potential(None, (0, 0, 0), WalkParams(0.5, L, 200), None, gen, membership=pred)
    assert est.value == pytest.approx(0.5**L, abs=0)


def test_estimate_potential_m1_limit():
    # exit after exactly one flip, so the estimate converges to gamma
    gen = RandomStream(6).generator()
    pred = MembershipPredicate.from_set([(0,)], 1)
    est = estimate_potential(None, (0,), WalkParams(0.5, 10, 20_000), None, gen, membership=pred)
    assert est.value == pytest.approx(0.5, abs=0)  # tau == 1 deterministically


def test_estimate_potential_paths_agree_statistically():
    # sequential (small U) and vectorized (large U) rollouts estimate the same mean
    m = 4
    inside = [unpack(c, m) for c in range(16) if bin(c).count("1") <= 2]
    pred = MembershipPredicate.from_set(inside, m)
    params_small = WalkParams(0.7, 20, 400)
    params_big = WalkParams(0.7, 20, 4000)
    small = estimate_potential(
        None, (0, 0, 0, 0), params_small, None, RandomStream(7).generator(), membership=pred
    )
    big = estimate_potential(
        None, (0, 0, 0, 0), params_big, None, RandomStream(8).generator(), membership=pred
    )
    exact = exact_truncated_flip_expectation(inside, (0, 0, 0, 0), 0.7, 20)
    assert abs(small.value - exact) < 4 * math.sqrt(1 / (4 * 400))
    assert abs(big.value - exact) < 4 * math.sqrt(1 / (4 * 4000))


def test_estimate_potential_charges_oracle_per_distinct_vertex():
    cls = FiniteTableClass((0, 1), [(0, 0), (0, 1), (1, 1)], "binary")
    ledger = QueryCostLedger()
    oracle = ConsistencyOracle(cls, ledger)
    gen = RandomStream(9).generator()
    estimate_potential((0, 1), (0, 0), WalkParams(0.5, 6, 50), oracle, gen, memoize=True)
    # at most all 4 patterns of the 2-cube can be probed
    assert ledger.call_count <= 4
    assert ledger.total_cost == 2 * ledger.call_count

    unmemo = QueryCostLedger()
    oracle2 = ConsistencyOracle(cls, unmemo)
    gen2 = RandomStream(9).generator()
    estimate_potential((0, 1), (0, 0), WalkParams(0.5, 6, 50), oracle2, gen2, memoize=False)
    assert unmemo.call_count > 50  # one call per probe, every trial probes at least once
    assert unmemo.call_count <= 50 * 7


def test_exact_generating_function_worked_instances():
    table = exact_generating_function([(0,)], Fraction(1, 2))
    assert table((0,)) == Fraction(1, 3)
    assert table((1,)) == 1  # outside the set

    table2 = exact_generating_function([(0, 0), (0, 1)], Fraction(1, 2))
    assert table2((0, 0)) == Fraction(1, 5)
    assert table2((0, 1)) == Fraction(1, 5)


def test_exact_generating_function_residuals_random():
    gen = np.random.default_rng(31)
    for trial in range(60):
        m = int(gen.integers(1, 8))
        size = int(gen.integers(1, min(12, 2**m) + 1))
        codes = gen.choice(2**m, size=size, replace=False)
        inside = [unpack(int(c), m) for c in codes]
        gamma = Fraction(int(gen.integers(30, 99)), 100)
        method = "rational" if trial % 2 == 0 else "float"
        table = exact_generating_function(inside, gamma, method=method)
        assert recursion_residual(table, inside, gamma) <= 1e-10
        whole_cube = size == 2**m  # no exit exists, so the potential vanishes
        for v in inside:
            val = float(table(v))
            assert 0 <= val <= 1
            assert val > 0 or whole_cube


def test_rational_and_float_solvers_agree():
    gen = np.random.default_rng(37)
    m = 5
    codes = gen.choice(2**m, size=10, replace=False)
    inside = [unpack(int(c), m) for c in codes]
    exact = exact_generating_function(inside, Fraction(9, 10), method="rational")
    approx = exact_generating_function(inside, Fraction(9, 10), method="float")
    for v in inside:
        assert float(exact(v)) == pytest.approx(approx(v), abs=1e-12)


def test_flip_walk_reparametrization():
    # E[g^tau] for the flip walk equals the lazy generating function at 2g/(1+g)
    assert lazy_discount(Fraction(1, 2)) == Fraction(2, 3)
    gen = np.random.default_rng(41)
    m = 4
    codes = gen.choice(2**m, size=6, replace=False)
    inside = [unpack(int(c), m) for c in codes]
    g = Fraction(4, 5)
    lazy_table = exact_generating_function(inside, lazy_discount(g))
    for v in inside:
        horizon = 400  # truncation error g^400 is negligible
        dp = exact_truncated_flip_expectation(inside, v, float(g), horizon)
        assert dp == pytest.approx(float(lazy_table(v)), abs=1e-9)


def test_truncated_expectation_bias_bound():
    gen = np.random.default_rng(43)
    m = 5
    codes = gen.choice(2**m, size=8, replace=False)
    inside = [unpack(int(c), m) for c in codes]
    g = 0.9
    lazy_table = exact_generating_function(inside, lazy_discount(Fraction(9, 10)))
    for v in inside:
        for horizon in (5, 20, 60):
            dp = exact_truncated_flip_expectation(inside, v, g, horizon)
            assert abs(dp - float(lazy_table(v))) <= g**horizon + 1e-12


def test_orientation_probability_examples():
    f = {(0, 0): 0.2, (0, 1): 0.5}
    assert orientation_probability(lambda v: 0.3, 0.0, (0, 0), (0, 1)) == 0.5
    assert orientation_probability(lambda v: 0.4, 1.0, (0, 0), (0, 1)) == 0.5
    # mass on v: probability the edge points away from v'
    assert orientation_probability(f.__getitem__, 1.0, (0, 1), (0, 0)) == pytest.approx(0.65)
    with pytest.raises(ContractViolation):
        orientation_probability(lambda v: 0.0, 1.0, (0, 0), (1, 1))


def test_out_degree_examples():
    isolated = out_degree([(0, 0)], lambda v: 0.5, 1.0, (0, 0))
    assert isolated == 0
    m = 3
    full = [unpack(c, m) for c in range(8)]
    assert out_degree(full, lambda v: 0.25, 1.0, (0, 0, 0)) == pytest.approx(m / 2)
    table = exact_generating_function([(0, 0), (0, 1)], Fraction(1, 2))
    assert out_degree([(0, 0), (0, 1)], table, Fraction(1), (0, 0)) == Fraction(1, 2)
    with pytest.raises(ContractViolation):
        out_degree([(0, 0)], lambda v: 0.5, 1.0, (1, 1))


def test_default_horizon_inequality():
    for gamma in (0.5, 0.8, 0.95, 0.99):
        L = default_horizon(gamma)
        assert gamma**L <= (1 - gamma) / (32 * math.e) + 1e-15
        assert gamma ** (L - 1) > (1 - gamma) / (32 * math.e)


def test_estimate_potential_double_run_determinism():
    m = 4
    inside = [unpack(c, m) for c in range(16) if c % 3 != 1]
    pred = MembershipPredicate.from_set(inside, m)
    for trials in (100, 600):  # both execution paths
        a = estimate_potential(
            None, (0,) * m, WalkParams(0.8, 15, trials), None,
            RandomStream(11).child(5).generator(), membership=pred,
        )
        b = estimate_potential(
            None, (0,) * m, WalkParams(0.8, 15, trials), None,
            RandomStream(11).child(5).generator(), membership=pred,
        )
        assert a == b

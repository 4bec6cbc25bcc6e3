"""Brute-force cross-check battery behind the `oig selftest` subcommand.

Each check pits an analytic oracle or a randomized estimator against exhaustive
enumeration on small random instances and prints one pass/fail line.
"""

from __future__ import annotations

from fractions import Fraction

from . import brute
from .classes import FiniteTableClass, HPrimeClass, MarginThresholdClass
from .core import STAR, RandomStream, Sample, loss_bin
from .ermred import sample_erm_binary
from .oig import exact_generating_function, recursion_residual, unpack
from .oracle import ErmValueOracle, QueryCostLedger


def _random_binary_table(gen, num_points=4, num_hyps=6, star_rate=0.15) -> FiniteTableClass:
    rows = set()
    while len(rows) < num_hyps:
        row = tuple(
            STAR if gen.random() < star_rate else int(gen.integers(0, 2))
            for _ in range(num_points)
        )
        rows.add(row)
    return FiniteTableClass(tuple(range(num_points)), sorted(rows, key=str), "binary")


def _check_finite_oracles(gen) -> bool:
    for _ in range(200):
        cls = _random_binary_table(gen)
        n = int(gen.integers(1, 6))
        xs = tuple(int(v) for v in gen.integers(0, len(cls.domain), size=n))
        ys = tuple(int(v) for v in gen.integers(0, 2, size=n))
        sample = Sample(zip(xs, ys))
        analytic = cls.consistent_on(xs, ys)
        enumerated = any(
            all(cls.value_at(i, x) == y for x, y in sample)
            for i in range(len(cls.table))
        )
        if analytic != enumerated:
            return False
        value, _ = brute.brute_erm(cls, sample, loss_bin)
        if cls.erm_value_on(xs, ys, loss_bin) != value:
            return False
        if analytic != (value == 0):
            return False
    return True


def _check_margin_threshold(gen) -> bool:
    cls = MarginThresholdClass.regular(0, Fraction(1, 20), 21, Fraction(1, 10))
    table = cls.materialize([Fraction(k, 16) for k in range(17)])
    for _ in range(200):
        n = int(gen.integers(1, 6))
        xs = tuple(Fraction(int(v), 16) for v in gen.integers(0, 17, size=n))
        ys = tuple(int(v) for v in gen.integers(0, 2, size=n))
        if cls.consistent_on(xs, ys) != table.consistent_on(xs, ys):
            return False
        if cls.erm_value_on(xs, ys, loss_bin) != table.erm_value_on(xs, ys, loss_bin):
            return False
    return True


def _check_hprime(gen) -> bool:
    cls = HPrimeClass(bound=80)
    window = list(range(1, 41))
    table = cls.materialize(window)
    for _ in range(300):
        n = int(gen.integers(1, 5))
        xs = tuple(int(v) for v in gen.integers(1, 41, size=n))
        ys = tuple(int(v) for v in gen.integers(0, 2, size=n))
        if cls.consistent_on(xs, ys) != table.consistent_on(xs, ys):
            return False
    return True


def _check_recursion(gen) -> bool:
    for _ in range(50):
        m = int(gen.integers(2, 7))
        count = int(gen.integers(1, min(10, 2**m) + 1))
        codes = gen.choice(2**m, size=count, replace=False)
        inside = [unpack(int(c), m) for c in codes]
        gamma = 0.5 + 0.45 * gen.random()
        table = exact_generating_function(inside, Fraction(gamma).limit_denominator(1000))
        if recursion_residual(table, inside, float(Fraction(gamma).limit_denominator(1000))) > 1e-10:
            return False
    return True


def _check_erm_reduction(gen) -> bool:
    for _ in range(100):
        cls = _random_binary_table(gen, num_points=4, num_hyps=5)
        n = int(gen.integers(1, 6))
        xs = tuple(int(v) for v in gen.integers(0, 4, size=n))
        ys = tuple(int(v) for v in gen.integers(0, 2, size=n))
        sample = Sample(zip(xs, ys))
        ledger = QueryCostLedger()
        z = sample_erm_binary(sample, ErmValueOracle(cls, loss_bin, ledger))
        value, winners = brute.brute_erm(cls, sample, loss_bin)
        if Fraction(sum(z), n) != value:
            return False
        vectors = {
            tuple(loss_bin(y, cls.value_at(w, x)) for x, y in sample) for w in winners
        }
        if tuple(z) not in vectors:
            return False
        if ledger.call_count > 2 * n * n:
            return False
    return True


CHECKS = (
    ("finite-table oracles vs enumeration", _check_finite_oracles),
    ("margin-threshold oracles vs materialized table", _check_margin_threshold),
    ("hprime consistency vs materialized window", _check_hprime),
    ("generating-function recursion residuals", _check_recursion),
    ("weak-ERM minimizer extraction vs enumeration", _check_erm_reduction),
)


def run_selftest(seed: int = 20240817) -> int:
    gen = RandomStream(seed).generator()
    failures = 0
    for name, check in CHECKS:
        ok = check(gen)
        print(f"{'PASS' if ok else 'FAIL'}  {name}")
        if not ok:
            failures += 1
    return failures

"""Concrete concept classes with analytically implemented oracles.

Three families ship here: explicit finite tables (binary-with-star, multiclass
or real valued), margin thresholds over a finite grid (a canonical
VC-dimension-1 partial class), and the primality-based class whose point is
that realizability is cheap to decide while producing a minimizer would factor
integers.  Every oracle answer is exact and cross-checkable by enumeration.
"""

from __future__ import annotations

from bisect import bisect_left
from fractions import Fraction
from functools import lru_cache
from math import gcd
from typing import Any, Iterable, Sequence

_PRIME_CACHE_SIZE = 1 << 16

from .core import STAR, ContractViolation, Sample, as_fraction
from .oracle import (
    CONSISTENCY,
    ERM_VALUE,
    RANGE_CONSISTENCY,
    STRONG_ERM,
    ConceptClass,
    OracleCapabilityError,
)


class TableHypothesis:
    """An evaluable row of a finite table class."""

    __slots__ = ("owner", "index")

    def __init__(self, owner: "FiniteTableClass", index: int):
        self.owner = owner
        self.index = index

    def __call__(self, x):
        return self.owner.value_at(self.index, x)

    def __eq__(self, other):
        return (
            isinstance(other, TableHypothesis)
            and other.owner is self.owner
            and other.index == self.index
        )

    def __repr__(self):
        return f"TableHypothesis(#{self.index})"


class FiniteTableClass(ConceptClass):
    """A concept class given by an explicit (hypothesis x domain point) table.

    kind is one of 'binary' (labels 0/1/STAR), 'multiclass' (labels 1..K) or
    'real' (rational labels in [0,1]).  All four oracles are implemented by
    enumeration and answer exactly.
    """

    capabilities = frozenset({CONSISTENCY, ERM_VALUE, RANGE_CONSISTENCY, STRONG_ERM})

    def __init__(self, domain: Sequence, table: Sequence[Sequence], kind: str, num_classes: int | None = None):
        if kind not in ("binary", "multiclass", "real"):
            raise ContractViolation(f"unknown table kind {kind!r}")
        self.domain = tuple(domain)
        if not self.domain:
            raise ContractViolation("domain must be nonempty")
        self.kind = kind
        self.num_classes = num_classes
        rows = []
        for row in table:
            row = tuple(row)
            if len(row) != len(self.domain):
                raise ContractViolation("table row length must match the domain")
            if kind == "binary":
                if any(v not in (0, 1) and v is not STAR for v in row):
                    raise ContractViolation("binary table entries must be 0, 1 or STAR")
            elif kind == "multiclass":
                if num_classes is None:
                    raise ContractViolation("multiclass tables need num_classes")
                if any(not (1 <= v <= num_classes) for v in row):
                    raise ContractViolation("multiclass labels must lie in 1..K")
            else:
                row = tuple(as_fraction(v) for v in row)
                if any(not (0 <= v <= 1) for v in row):
                    raise ContractViolation("real labels must lie in [0,1]")
            rows.append(row)
        if len(set(rows)) != len(rows):
            raise ContractViolation("table hypotheses must be distinct")
        if not rows:
            raise ContractViolation("table must be nonempty")
        self.table = tuple(rows)
        self._col = {x: i for i, x in enumerate(self.domain)}
        if len(self._col) != len(self.domain):
            raise ContractViolation("domain points must be distinct")
        self._patterns_on = lru_cache(maxsize=4096)(self._patterns_on_impl)

    def value_at(self, row: int, x):
        return self.table[row][self._column(x)]

    def hypothesis(self, row: int) -> TableHypothesis:
        return TableHypothesis(self, row)

    def hypotheses(self):
        return [TableHypothesis(self, i) for i in range(len(self.table))]

    def _column(self, x) -> int:
        try:
            return self._col[x]
        except KeyError:
            raise ContractViolation(f"point {x!r} is outside the class domain") from None

    def _patterns_on_impl(self, xs: tuple) -> frozenset:
        cols = tuple(self._column(x) for x in xs)
        out = set()
        for row in self.table:
            pattern = tuple(row[c] for c in cols)
            if STAR not in pattern:
                out.add(pattern)
        return frozenset(out)

    def consistent_on(self, xs, ys) -> bool:
        return tuple(ys) in self._patterns_on(tuple(xs))

    def erm_value_on(self, xs, ys, loss) -> Fraction:
        cols = [self._column(x) for x in xs]
        best = None
        for row in self.table:
            total = sum(loss(y, row[c]) for y, c in zip(ys, cols))
            if best is None or total < best:
                best = total
                if best == 0:
                    break
        return Fraction(best) / len(xs)

    def range_consistent_on(self, xs, lower, upper) -> bool:
        if self.kind != "real":
            raise OracleCapabilityError("range consistency only applies to real-valued tables")
        cols = [self._column(x) for x in xs]
        for row in self.table:
            if all(lo <= row[c] <= hi for c, lo, hi in zip(cols, lower, upper)):
                return True
        return False

    def erm_hypothesis(self, sample: Sample, loss) -> TableHypothesis:
        cols = [self._column(x) for x in sample.xs]
        best_idx, best_total = 0, None
        for i, row in enumerate(self.table):
            total = sum(loss(y, row[c]) for y, c in zip(sample.ys, cols))
            if best_total is None or total < best_total:
                best_idx, best_total = i, total
        return TableHypothesis(self, best_idx)

    def project_onto(self, xs) -> frozenset:
        """The star-free label patterns the class realizes on the point sequence."""
        return self._patterns_on(tuple(xs))


class MarginThresholdClass(ConceptClass):
    """Threshold hypotheses with an abstention band of half-width `margin`.

    For each grid value t, h_t maps x to 1 when x >= t + margin, to 0 when
    x <= t - margin, and is undefined in between.  Thresholds live on a finite
    grid so that consistency and ERM values stay exactly computable.
    """

    capabilities = frozenset({CONSISTENCY, ERM_VALUE})

    def __init__(self, grid: Iterable, margin):
        self.grid = tuple(sorted(as_fraction(t) for t in grid))
        if not self.grid:
            raise ContractViolation("threshold grid must be nonempty")
        self.margin = as_fraction(margin)
        if not (0 < self.margin < 1):
            raise ContractViolation("margin must lie in (0,1)")

    @classmethod
    def regular(cls, start, step, count, margin) -> "MarginThresholdClass":
        start, step = as_fraction(start), as_fraction(step)
        return cls([start + k * step for k in range(count)], margin)

    def label_of(self, t: Fraction, x) -> Any:
        x = as_fraction(x)
        if x >= t + self.margin:
            return 1
        if x <= t - self.margin:
            return 0
        return STAR

    def consistent_on(self, xs, ys) -> bool:
        lo, hi = None, None
        for x, y in zip(xs, ys):
            x = as_fraction(x)
            if y == 1:
                cap = x - self.margin
                hi = cap if hi is None or cap < hi else hi
            else:
                cap = x + self.margin
                lo = cap if lo is None or cap > lo else lo
        idx = 0 if lo is None else bisect_left(self.grid, lo)
        if idx >= len(self.grid):
            return False
        return hi is None or self.grid[idx] <= hi

    def erm_value_on(self, xs, ys, loss) -> Fraction:
        xs = [as_fraction(x) for x in xs]
        best = None
        for t in self.grid:
            total = sum(loss(y, self.label_of(t, x)) for x, y in zip(xs, ys))
            if best is None or total < best:
                best = total
                if best == 0:
                    break
        return Fraction(best) / len(xs)

    def project_onto(self, xs) -> frozenset:
        xs = [as_fraction(x) for x in xs]
        out = set()
        for t in self.grid:
            pattern = tuple(self.label_of(t, x) for x in xs)
            if STAR not in pattern:
                out.add(pattern)
        return frozenset(out)

    def materialize(self, points) -> FiniteTableClass:
        """Explicit table restriction (with STAR entries) for brute-force checks."""
        points = tuple(points)
        rows = {tuple(self.label_of(t, x) for x in points) for t in self.grid}
        return FiniteTableClass(points, sorted(rows, key=_star_sort_key), "binary")


def _star_sort_key(row):
    return tuple(2 if v is STAR else v for v in row)


# deterministic Miller-Rabin witnesses covering all n < 3.3 * 10^24
_MR_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)
_SMALL_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


@lru_cache(maxsize=_PRIME_CACHE_SIZE)
def is_prime(n: int) -> bool:
    """Exact primality for 64-bit integers (deterministic witness set)."""
    if n < 2:
        return False
    for p in _SMALL_PRIMES:
        if n == p:
            return True
        if n % p == 0:
            return False
    d, r = n - 1, 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for a in _MR_WITNESSES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _pollard_rho(n: int) -> int:
    """Some nontrivial factor of composite n (n odd, not a prime power issue-free)."""
    if n % 2 == 0:
        return 2
    for c in range(1, 64):
        x, y, d = 2, 2, 1
        while d == 1:
            x = (x * x + c) % n
            y = (y * y + c) % n
            y = (y * y + c) % n
            d = gcd(abs(x - y), n)
        if d != n:
            return d
    raise RuntimeError(f"factorization failed for {n}")  # unreachable for 64-bit inputs


def prime_factors(n: int) -> list[int]:
    """Prime factorization with multiplicity."""
    if n < 2:
        return []
    if is_prime(n):
        return [n]
    d = _pollard_rho(n)
    return sorted(prime_factors(d) + prime_factors(n // d))


@lru_cache(maxsize=_PRIME_CACHE_SIZE)
def semiprime_split(n: int) -> tuple[int, int] | None:
    """(p, q) with p <= q prime and p*q == n, or None if n is not such a product."""
    factors = prime_factors(n)
    if len(factors) == 2:
        return factors[0], factors[1]
    return None


def next_prime_above(n: int) -> int:
    k = n + 1
    while not is_prime(k):
        k += 1
    return k


class HPrimeClass(ConceptClass):
    """Indicators of {p, q, pq} for prime pairs, plus point indicators g_n for
    every n that is not a product of two primes.

    Deciding realizability is polynomial-time case analysis over the positive
    points; returning an actual minimizer would reveal prime factors, so the
    strong ERM oracle is deliberately withheld.
    """

    capabilities = frozenset({CONSISTENCY})

    def __init__(self, bound: int):
        if bound < 1:
            raise ContractViolation("bound must be a positive integer")
        self.bound = bound

    def _validate(self, xs, ys):
        for x in xs:
            if not isinstance(x, int) or x < 1 or x > self.bound:
                raise ContractViolation(
                    f"queries must use integers in [1, {self.bound}], got {x!r}"
                )
        if any(y not in (0, 1) for y in ys):
            raise ContractViolation("labels must be 0 or 1")

    def consistent_on(self, xs, ys) -> bool:
        self._validate(xs, ys)
        assigned: dict[int, int] = {}
        for x, y in zip(xs, ys):
            if assigned.setdefault(x, y) != y:
                return False  # the same point demanded both labels
        positives = sorted(x for x, y in assigned.items() if y == 1)
        zeros = {x for x, y in assigned.items() if y == 0}
        if not positives:
            return True
        if len(positives) == 1:
            n = positives[0]
            split = semiprime_split(n)
            if split is None:
                # either n is prime (pair it with a fresh large prime) or the
                # point indicator of n exists; zeros never interfere
                return True
            p, q = split
            return p not in zeros and q not in zeros
        # two or more positives: only a pair hypothesis, with ones {p, q, pq},
        # can cover them
        if 1 in positives:
            return False
        primes = [x for x in positives if is_prime(x)]
        composites = [x for x in positives if not is_prime(x)]
        if len(composites) >= 2:
            return False
        if len(primes) >= 3:
            return False
        if not composites:
            p, q = primes
            return (p * q) not in zeros
        m = composites[0]
        if len(primes) == 2:
            p, q = primes
            return p * q == m
        p = primes[0]
        if m % p != 0:
            return False
        ratio = m // p
        if not is_prime(ratio):
            return False
        return ratio not in zeros

    def materialize(self, points: Sequence[int]) -> FiniteTableClass:
        """Explicit restriction to a finite query window, for brute-force checks.

        Pair hypotheses whose members exceed the window are represented by a
        single fresh prime above it; their restrictions collapse to indicator
        patterns already expressible inside the window.
        """
        points = tuple(points)
        top = max(points)
        small_primes = [k for k in range(2, top + 1) if is_prime(k)]
        big = next_prime_above(top)
        rows = {tuple(0 for _ in points)}  # any hypothesis supported above the window
        candidates = small_primes + [big]
        for i, p in enumerate(candidates):
            for q in candidates[i:]:
                ones = {p, q, p * q}
                rows.add(tuple(1 if x in ones else 0 for x in points))
        for n in points:
            if semiprime_split(n) is None:
                rows.add(tuple(1 if x == n else 0 for x in points))
        return FiniteTableClass(points, sorted(rows), "binary")


def class_from_config(spec: dict) -> ConceptClass:
    """Build a concept class from its structured-text description."""
    try:
        kind = spec["kind"]
    except (KeyError, TypeError):
        raise ContractViolation("class config needs a 'kind' tag") from None
    if kind == "finite_table":
        table = [[_parse_binary_label(v) for v in row] for row in spec["table"]]
        return FiniteTableClass(parse_points(spec["domain"]), table, "binary")
    if kind == "finite_multiclass":
        return FiniteTableClass(
            parse_points(spec["domain"]), spec["table"], "multiclass", num_classes=spec["num_classes"]
        )
    if kind == "finite_real":
        table = [[as_fraction(v) for v in row] for row in spec["table"]]
        return FiniteTableClass(parse_points(spec["domain"]), table, "real")
    if kind == "margin_threshold":
        grid = spec["grid"]
        if isinstance(grid, (list, tuple)) and len(grid) == 3 and isinstance(grid[2], int):
            start, step, count = grid
            return MarginThresholdClass.regular(start, step, count, spec["margin"])
        return MarginThresholdClass([as_fraction(t) for t in grid], spec["margin"])
    if kind == "hprime":
        return HPrimeClass(spec["bound"])
    raise ContractViolation(f"unknown class kind {kind!r}")


def _parse_binary_label(v):
    if v in (0, 1):
        return v
    if v in ("*", None):
        return STAR
    raise ContractViolation(f"binary table entries must be 0, 1 or '*', got {v!r}")


def parse_points(values):
    out = []
    for v in values:
        if isinstance(v, str):
            out.append(as_fraction(v))
        elif isinstance(v, float):
            out.append(as_fraction(v))
        else:
            out.append(v)
    return tuple(out)

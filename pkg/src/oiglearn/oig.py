"""Hypercube random-walk machinery behind the one-inclusion-graph learner.

A vertex is a 0/1 labeling pattern on m fixed domain points.  The learner
estimates, per vertex, the discounted time for a uniform-coordinate-flip walk
to leave the realizable pattern set W; those potentials induce a random
orientation of the one-inclusion graph.  This module provides the Monte-Carlo
estimator, an exact linear-system solver for the walk's generating function,
the truncated-expectation dynamic program used to validate the estimator, and
the orientation / out-degree arithmetic.

Two walk conventions coexist.  Rollouts flip a uniformly random coordinate
every step; the closed-form recursion solved by `exact_generating_function`
describes the lazy walk that holds with probability 1/2.  The two are linked
by a discount change: the flip walk's generating function at discount g equals
the lazy walk's at 2g/(1+g).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Mapping

import numpy as np

from .core import ContractViolation, as_fraction

Vertex = tuple  # of 0/1 ints

# batch rollouts through numpy once this many trials are requested
_VECTOR_TRIALS = 512


def flip(v: Vertex, i: int) -> Vertex:
    """v with coordinate i flipped (0-indexed)."""
    return v[:i] + (1 - v[i],) + v[i + 1 :]


def random_flip_step(v: Vertex, gen: np.random.Generator) -> Vertex:
    """One walk step: flip a uniformly chosen coordinate."""
    m = len(v)
    if m < 1:
        raise ContractViolation("vertices need at least one coordinate")
    return flip(v, int(gen.integers(0, m)))


def pack(v: Vertex) -> int:
    code = 0
    for j, b in enumerate(v):
        if b:
            code |= 1 << j
    return code


def unpack(code: int, m: int) -> Vertex:
    return tuple((code >> j) & 1 for j in range(m))


def neighbors(v: Vertex):
    return [flip(v, i) for i in range(len(v))]


@dataclass(frozen=True)
class WalkParams:
    """Discount, truncation horizon and trial count for potential estimation."""

    gamma: float
    horizon: int
    trials: int

    def __post_init__(self):
        if not (0 < self.gamma < 1):
            raise ContractViolation("discount must lie in (0,1)")
        if self.horizon < 0 or self.trials < 1:
            raise ContractViolation("horizon must be >= 0 and trials >= 1")


@dataclass(frozen=True)
class PotentialEstimate:
    value: float
    trials: int


def default_horizon(gamma: float) -> int:
    """Smallest truncation length with gamma^L below the estimator's bias budget."""
    g = float(gamma)
    return int(np.ceil(np.log(32 * np.e / (1 - g)) / np.log(1 / g)))


class MembershipPredicate:
    """Answers 'is this vertex a realizable pattern?' for a fixed point sequence.

    Backed either by a consistency-oracle handle (each fresh evaluation is one
    oracle call of size m) or by an explicit vertex set.  With memoization on,
    repeated queries for the same vertex hit a per-predicate cache and charge
    the ledger only once.
    """

    def __init__(self, m: int, evaluate: Callable[[int], bool], memoize: bool = True):
        self.m = m
        self._evaluate = evaluate
        self.memoize = memoize
        self._memo: dict[int, bool] = {}

    @classmethod
    def from_oracle(cls, points: tuple, oracle, memoize: bool = True) -> "MembershipPredicate":
        points = tuple(points)
        m = len(points)

        def evaluate(code: int) -> bool:
            return oracle.on_labels(points, unpack(code, m))

        return cls(m, evaluate, memoize)

    @classmethod
    def from_set(cls, inside: Iterable[Vertex], m: int) -> "MembershipPredicate":
        packed = frozenset(pack(v) for v in inside)
        return cls(m, lambda code: code in packed, memoize=True)

    def query(self, v: Vertex) -> bool:
        return self.query_packed(pack(v))

    def query_packed(self, code: int) -> bool:
        if not self.memoize:
            return self._evaluate(code)
        memo = self._memo
        val = memo.get(code)
        if val is None:
            val = self._evaluate(code)
            memo[code] = val
        return val

    def query_packed_batch(self, codes: np.ndarray) -> np.ndarray:
        uniq, inverse = np.unique(codes, return_inverse=True)
        vals = np.empty(len(uniq), dtype=bool)
        for j, code in enumerate(uniq):
            vals[j] = self.query_packed(int(code))
        return vals[inverse]


def rollout_hitting_time(y: Vertex, membership: MembershipPredicate, horizon: int, gen) -> int:
    """min(t : Y^t leaves the set, truncated at `horizon`), one membership
    evaluation per step taken."""
    m = len(y)
    code = pack(y)
    t = 0
    while True:
        if not membership.query_packed(code):
            return t
        if t == horizon:
            return horizon
        code ^= 1 << int(gen.integers(0, m))
        t += 1


def estimate_potential(
    points: tuple,
    y: Vertex,
    params: WalkParams,
    con_oracle,
    gen: np.random.Generator,
    memoize: bool = True,
    membership: MembershipPredicate | None = None,
) -> PotentialEstimate:
    """Monte-Carlo estimate of E[gamma^(horizon ∧ exit time)] from vertex y.

    Runs `params.trials` independent truncated rollouts of the coordinate-flip
    walk, probing membership of the current vertex through the consistency
    oracle at every step.  Returns the mean discounted (truncated) hitting
    time; the value is exactly 1 iff y itself is not realizable.
    """
    if membership is None:
        membership = MembershipPredicate.from_oracle(points, con_oracle, memoize=memoize)
    if len(y) != membership.m:
        raise ContractViolation("vertex length must match the point sequence")
    if params.trials >= _VECTOR_TRIALS:
        value = _rollouts_vectorized(y, membership, params, gen)
    else:
        value = _rollouts_sequential(y, membership, params, gen)
    return PotentialEstimate(value, params.trials)


def _rollouts_sequential(y, membership, params, gen) -> float:
    m = len(y)
    L, U = params.horizon, params.trials
    gamma_pow = [1.0]
    for _ in range(L):
        gamma_pow.append(gamma_pow[-1] * params.gamma)
    start = pack(y)
    query = membership.query_packed
    # buffered coordinate draws keep generator overhead off the inner loop
    buf = gen.integers(0, m, size=max(64, 4 * U)).tolist()
    pos = 0
    total = 0.0
    for _ in range(U):
        code = start
        t = 0
        while True:
            if not query(code):
                break
            if t == L:
                break
            if pos == len(buf):
                buf = gen.integers(0, m, size=len(buf)).tolist()
                pos = 0
            code ^= 1 << buf[pos]
            pos += 1
            t += 1
        total += gamma_pow[t]
    return total / U


def _rollouts_vectorized(y, membership, params, gen) -> float:
    m = len(y)
    L, U = params.horizon, params.trials
    codes = np.full(U, pack(y), dtype=np.uint64)
    stop_t = np.full(U, L, dtype=np.int64)
    alive = np.arange(U)
    for t in range(L + 1):
        inside = membership.query_packed_batch(codes[alive])
        exited = alive[~inside]
        stop_t[exited] = t
        alive = alive[inside]
        if t == L or len(alive) == 0:
            break
        coords = gen.integers(0, m, size=len(alive)).astype(np.uint64)
        codes[alive] ^= np.uint64(1) << coords
    return float(np.mean(params.gamma ** stop_t.astype(np.float64)))


class PotentialTable:
    """Vertex -> generating-function value; defaults to 1 outside the solved set."""

    def __init__(self, values: Mapping[Vertex, object], m: int):
        self.values = dict(values)
        self.m = m

    def __call__(self, v: Vertex):
        return self.values.get(tuple(v), 1)

    def min_inside(self):
        return min(self.values.values())

    def items(self):
        return self.values.items()


def lazy_discount(flip_gamma) -> Fraction:
    """Discount at which the lazy-walk generating function matches the flip walk's.

    One flip-walk step costs a Geometric(1/2) number of lazy steps, whence
    E[g^tau_flip] equals the lazy generating function at 2g/(1+g).
    """
    g = as_fraction(flip_gamma)
    return 2 * g / (1 + g)


def exact_generating_function(
    inside: Iterable[Vertex],
    gamma,
    m: int | None = None,
    method: str = "auto",
    rational_cutoff: int = 64,
) -> PotentialTable:
    """Solve the lazy-walk recursion M(v) = g/((2-g)m) * sum_i M(v^flip i) exactly.

    M is 1 outside the set.  Small systems are solved in rational arithmetic
    (so worked examples come out as exact fractions); larger ones fall back to
    a floating solve, whose residual stays far below 1e-12 because the system
    is strictly diagonally dominant.
    """
    vertices = sorted(set(tuple(v) for v in inside), key=pack)
    if not vertices:
        return PotentialTable({}, m or 0)
    if m is None:
        m = len(vertices[0])
    if any(len(v) != m for v in vertices):
        raise ContractViolation("all vertices must share one dimension")
    if m > 30 or len(vertices) > 4096:
        raise ContractViolation("exact solve is limited to m <= 30 and 4096 patterns")
    index = {v: i for i, v in enumerate(vertices)}
    size = len(vertices)
    if method == "auto":
        method = "rational" if size <= rational_cutoff else "float"
    if method == "rational":
        g = as_fraction(gamma)
        diag = (2 - g) * m / g
        rows = []
        rhs = []
        for v in vertices:
            row = [Fraction(0)] * size
            row[index[v]] = diag
            outside = 0
            for w in neighbors(v):
                j = index.get(w)
                if j is None:
                    outside += 1
                else:
                    row[j] -= 1
            rows.append(row)
            rhs.append(Fraction(outside))
        solution = _solve_rational(rows, rhs)
        return PotentialTable({v: solution[index[v]] for v in vertices}, m)
    g = float(gamma)
    a = np.zeros((size, size))
    b = np.zeros(size)
    for v in vertices:
        i = index[v]
        a[i, i] = (2 - g) * m / g
        for w in neighbors(v):
            j = index.get(w)
            if j is None:
                b[i] += 1.0
            else:
                a[i, j] -= 1.0
    solution = np.linalg.solve(a, b)
    return PotentialTable({v: float(solution[index[v]]) for v in vertices}, m)


def _solve_rational(rows: list[list[Fraction]], rhs: list[Fraction]) -> list[Fraction]:
    """Gaussian elimination with exact fractions and partial pivoting."""
    n = len(rows)
    a = [row[:] + [r] for row, r in zip(rows, rhs)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if a[r][col] != 0), None)
        if pivot is None:
            raise RuntimeError("singular recursion system; this should be impossible")
        a[col], a[pivot] = a[pivot], a[col]
        inv = 1 / a[col][col]
        a[col] = [x * inv for x in a[col]]
        for r in range(n):
            if r != col and a[r][col] != 0:
                factor = a[r][col]
                a[r] = [x - factor * y for x, y in zip(a[r], a[col])]
    return [a[r][n] for r in range(n)]


def recursion_residual(table: PotentialTable, inside: Iterable[Vertex], gamma) -> float:
    """max over solved vertices of |m*M(v) - sum_i M(v^flip i) + m*2(1-g)/g*M(v)|."""
    g = float(gamma)
    m = table.m
    worst = 0.0
    for v in inside:
        v = tuple(v)
        total = sum(float(table(w)) for w in neighbors(v))
        res = m * float(table(v)) - total + m * (2 * (1 - g) / g) * float(table(v))
        worst = max(worst, abs(res))
    return worst


def exact_truncated_flip_expectation(
    inside: Iterable[Vertex], y: Vertex, gamma: float, horizon: int, m: int | None = None
) -> float:
    """E[gamma^(horizon ∧ exit time)] for the coordinate-flip walk, by dynamic
    programming over the alive-mass distribution.  Independent of the
    Monte-Carlo path; used to validate it."""
    vertices = sorted(set(tuple(v) for v in inside), key=pack)
    y = tuple(y)
    if m is None:
        m = len(y)
    if y not in set(vertices):
        return 1.0
    index = {v: i for i, v in enumerate(vertices)}
    size = len(vertices)
    move = np.zeros((size, size))
    exit_prob = np.zeros(size)
    for v in vertices:
        i = index[v]
        out = 0
        for w in neighbors(v):
            j = index.get(w)
            if j is None:
                out += 1
            else:
                move[j, i] += 1.0 / m
        exit_prob[i] = out / m
    p = np.zeros(size)
    p[index[y]] = 1.0
    total = 0.0
    g = float(gamma)
    for t in range(1, horizon + 1):
        total += (g**t) * float(exit_prob @ p)
        p = move @ p
    total += (g**horizon) * float(p.sum())
    return total


def orientation_probability(potential, lam, v: Vertex, v_prime: Vertex):
    """Mass the induced random orientation of edge (v, v') puts on v_prime,
    i.e. the probability the edge points away from v."""
    v, v_prime = tuple(v), tuple(v_prime)
    if sum(a != b for a, b in zip(v, v_prime)) != 1 or len(v) != len(v_prime):
        raise ContractViolation("orientation is defined on hypercube edges only")
    f = potential if callable(potential) else potential.__getitem__
    value = (1 + lam * (f(v) - f(v_prime))) / 2
    return min(max(value, 0), 1)


def out_degree(inside, potential, lam, v: Vertex):
    """Total orientation mass directed away from v over its one-inclusion edges."""
    inside = set(tuple(u) for u in inside)
    v = tuple(v)
    if v not in inside:
        raise ContractViolation("out-degree is defined for vertices of the graph")
    f = potential if callable(potential) else potential.__getitem__
    total = 0
    for w in neighbors(v):
        if w in inside:
            # mass on w = probability the edge leaves v
            total += (1 - lam * (f(w) - f(v))) / 2
    return total

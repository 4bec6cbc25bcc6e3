"""Independent brute-force reference oracles for tests and audits.

Everything here enumerates: class projections, exhaustive ERM, the
combinatorial dimensions, and an exact orientation audit that recomputes the
one-inclusion out-degree of the ground-truth vertex from the solved generating
function.  Instance-size ceilings are hard contracts, not silent truncations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations

from .classes import FiniteTableClass, MarginThresholdClass
from .core import ContractViolation, FiniteDistribution, Sample, as_fraction
from .oig import PotentialTable, exact_generating_function, lazy_discount

_MAX_DOMAIN = 32
_MAX_TABLE = 2**16


def project(concept_class, points) -> frozenset:
    """The star-free label patterns realized on the point sequence."""
    return concept_class.project_onto(tuple(points))


def _check_size(concept_class: FiniteTableClass):
    if len(concept_class.domain) > _MAX_DOMAIN or len(concept_class.table) > _MAX_TABLE:
        raise ContractViolation("instance too large for exhaustive search")


def vc_dimension(concept_class: FiniteTableClass, check_growth: bool = True) -> int:
    """Largest d with some d-point subset whose projection is the full cube.

    Along the way, every examined projection is checked against the growth
    bound |patterns| <= (e*m/d)^d for the final d.
    """
    _check_size(concept_class)
    domain = concept_class.domain
    max_d = min(len(domain), max(1, int(math.log2(len(concept_class.table)))) + 1)
    examined: list[tuple[int, int]] = []  # (subset size, pattern count)
    dim = 0
    for d in range(1, max_d + 1):
        shattered = False
        for xs in combinations(domain, d):
            patterns = concept_class.project_onto(xs)
            examined.append((d, len(patterns)))
            if len(patterns) == 2**d:
                shattered = True
                break
        if not shattered:
            break
        dim = d
    if check_growth and dim >= 1:
        for m, count in examined:
            if m >= dim:
                bound = (math.e * m / dim) ** dim
                assert count <= bound + 1e-9, f"growth bound violated: {count} > {bound}"
    return dim


def natarajan_dimension(concept_class: FiniteTableClass) -> int:
    """Largest d admitting witness vectors a != b coordinatewise whose mixed
    patterns all appear in the projection."""
    _check_size(concept_class)
    if concept_class.kind != "multiclass":
        raise ContractViolation("Natarajan dimension applies to multiclass tables")
    domain = concept_class.domain
    dim = 0
    max_d = min(len(domain), max(1, int(math.log2(len(concept_class.table)))) + 1)
    for d in range(1, max_d + 1):
        if not _natarajan_witness_exists(concept_class, d):
            break
        dim = d
    return dim


def _natarajan_witness_exists(concept_class, d) -> bool:
    for xs in combinations(concept_class.domain, d):
        patterns = concept_class.project_onto(xs)
        plist = sorted(patterns)
        for ai in range(len(plist)):
            for bi in range(ai + 1, len(plist)):
                a, b = plist[ai], plist[bi]
                if any(u == v for u, v in zip(a, b)):
                    continue
                if all(
                    tuple(a[i] if (mask >> i) & 1 == 0 else b[i] for i in range(d)) in patterns
                    for mask in range(2**d)
                ):
                    return True
    return False


def fat_shattering(concept_class: FiniteTableClass, gamma) -> int:
    """Fat-shattering dimension at scale gamma, witness levels restricted to
    the class's value grid and its midpoints (exact for grid-valued classes)."""
    _check_size(concept_class)
    if concept_class.kind != "real":
        raise ContractViolation("fat-shattering applies to real-valued tables")
    if len(concept_class.domain) > 12 or len(concept_class.table) > 64:
        raise ContractViolation("instance too large for fat-shattering search")
    gamma = as_fraction(gamma)
    domain = concept_class.domain
    dim = 0
    max_d = min(len(domain), max(1, int(math.log2(len(concept_class.table)))) + 1)
    for d in range(1, max_d + 1):
        if not _fat_witness_exists(concept_class, d, gamma):
            break
        dim = d
    return dim


def _level_candidates(concept_class, x) -> list[Fraction]:
    # any feasible witness interval [max_low + g, min_high - g] contains the
    # midpoint of a pair of class values, so pairwise midpoints are exhaustive
    values = sorted({row[concept_class._column(x)] for row in concept_class.table})
    mids = {(a + b) / 2 for i, a in enumerate(values) for b in values[i:]}
    return sorted(set(values) | mids)


def _fat_witness_exists(concept_class, d, gamma) -> bool:
    full = 2**d
    for xs in combinations(concept_class.domain, d):
        candidate_levels = [_level_candidates(concept_class, x) for x in xs]
        cols = [concept_class._column(x) for x in xs]
        rows = [[row[c] for c in cols] for row in concept_class.table]
        for levels in _product(candidate_levels):
            patterns = set()
            for row in rows:
                bits = []
                for value, s in zip(row, levels):
                    if value >= s + gamma:
                        bits.append(1)
                    elif value <= s - gamma:
                        bits.append(0)
                    else:
                        break
                else:
                    patterns.add(tuple(bits))
            if len(patterns) == full:
                return True
    return False


def _product(lists):
    if not lists:
        yield ()
        return
    for head in lists[0]:
        for rest in _product(lists[1:]):
            yield (head,) + rest


def brute_erm(concept_class: FiniteTableClass, sample: Sample, loss) -> tuple[Fraction, tuple[int, ...]]:
    """Exact minimum empirical loss and the full set of minimizing table rows."""
    _check_size(concept_class)
    cols = [concept_class._column(x) for x in sample.xs]
    best: Fraction | None = None
    winners: list[int] = []
    for idx, row in enumerate(concept_class.table):
        total = sum(Fraction(loss(y, row[c])) for y, c in zip(sample.ys, cols))
        if best is None or total < best:
            best, winners = total, [idx]
        elif total == best:
            winners.append(idx)
    return best / len(sample), tuple(winners)


def distribution_opt(concept_class, distribution: FiniteDistribution, loss) -> Fraction:
    """Best-in-class expected loss under the distribution, by enumeration."""
    if isinstance(concept_class, FiniteTableClass):
        predictors = [h for h in concept_class.hypotheses()]
    elif isinstance(concept_class, MarginThresholdClass):
        predictors = [
            (lambda t: (lambda x: concept_class.label_of(t, x)))(t) for t in concept_class.grid
        ]
    else:
        raise ContractViolation("no enumerable hypotheses for this class")
    return min(distribution.expected_loss(h, loss) for h in predictors)


@dataclass(frozen=True)
class TransductiveAudit:
    """Exact orientation of the truth vertex's edges and its out-degree."""

    out_degree: float
    loo_error: float
    min_potential: float
    bound_rhs: float
    slack: float
    edge_mass_on_truth: tuple  # per coordinate: orientation mass on the truth vertex, or None if the edge is absent
    potential: PotentialTable


def exact_transductive_audit(
    concept_class,
    sample: Sample,
    gamma,
    lam,
    walk: str = "lazy",
) -> TransductiveAudit:
    """Recompute, with the exact generating function, the random orientation a
    potential-following predictor induces on the edges at the true labeling.

    walk='lazy' solves the hold-with-probability-1/2 recursion at discount
    gamma; walk='flip' audits the uniformly-flipping walk the Monte-Carlo
    rollouts implement, via the discount change 2g/(1+g).  The reported slack
    is against m/2 - (1-g_eff)*lam*m*min(potential), an identity-backed bound
    for the solved potential, so it is nonnegative up to solver residual.
    """
    m = len(sample)
    if m > 24:
        raise ContractViolation("audit is limited to m <= 24")
    points = sample.xs
    truth = tuple(sample.ys)
    inside = project(concept_class, points)
    if truth not in inside:
        raise ContractViolation("the sample's labeling is not realizable by the class")
    gamma = as_fraction(gamma)
    lam = as_fraction(lam)
    if walk == "lazy":
        effective = gamma
    elif walk == "flip":
        effective = lazy_discount(gamma)
    else:
        raise ContractViolation(f"unknown walk convention {walk!r}")
    table = exact_generating_function(inside, effective, m=m)
    masses = []
    total_out = Fraction(0)
    for i in range(m):
        other = truth[:i] + (1 - truth[i],) + truth[i + 1 :]
        if other not in inside:
            masses.append(None)
            continue
        mass_on_truth = (1 + lam * (_val(table, other) - _val(table, truth))) / 2
        masses.append(float(mass_on_truth))
        total_out += 1 - mass_on_truth
    min_potential = min(_val(table, v) for v in inside)
    rhs = Fraction(m, 2) - (1 - effective) * lam * m * min_potential
    return TransductiveAudit(
        out_degree=float(total_out),
        loo_error=float(total_out) / m,
        min_potential=float(min_potential),
        bound_rhs=float(rhs),
        slack=float(rhs - total_out),
        edge_mass_on_truth=tuple(masses),
        potential=table,
    )


def _val(table: PotentialTable, v):
    value = table(v)
    return value if isinstance(value, Fraction) else Fraction(float(value))

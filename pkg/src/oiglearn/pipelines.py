"""End-to-end learners: boosting the weak learner for partial binary samples,
plus the encodings that reduce multiclass and real-valued problems to it.

Multiclass samples become binary 'menu' examples over (point, label-pair)
inputs; regression samples become binary threshold examples over
(point, grid-threshold) inputs whose consistency is answered by range queries.
Agnostic variants first extract a maximum realizable subsample through the
weak-ERM reductions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .boost import BoostedModel, adaboost_predict, adaboost_train
from .classes import FiniteTableClass
from .core import STAR, ContractViolation, RandomStream, Sample, as_fraction
from .ermred import sample_con_real, sample_erm_binary, sample_erm_real
from .oracle import ErmValueOracle
from .weak import WeakLearnerParams, paper_default_params, weak_realizable


@dataclass(frozen=True)
class WeakSpec:
    """How the boosted pipelines instantiate their weak learner."""

    m: int  # weak-learner sample size
    c1: float = 1.0
    lam: float = 1.0
    memoize: bool = True

    def learner_params(self) -> WeakLearnerParams:
        return paper_default_params(self.m, self.c1, self.lam)

    def default_margin(self) -> float:
        return 1.0 / (self.m * math.log(self.m))


def boosting_rounds(n: int, delta: float, eta: float, log_factor: int) -> int:
    """ceil(16*log(log_factor*n/delta)/eta^2); log_factor is 4 for realizable
    pipelines and 6 for the agnostic binary one."""
    if n == 0:
        return 0
    return math.ceil(16 * math.log(log_factor * n / delta) / (eta * eta))


def make_weak_learner(params: WeakLearnerParams, con_oracle, memoize: bool = True,
                      total: bool = False):
    def learner(round_sample: Sample, x, stream: RandomStream) -> int:
        return weak_realizable(
            round_sample, x, params, con_oracle, stream, memoize=memoize, total=total
        ).bit

    return learner


class DerivedConsistencyOracle:
    """Consistency handle computed from another oracle handle.

    Cost accounting stays with the underlying handle: one derived query incurs
    exactly one underlying query, which is where the ledger charge happens.
    """

    def __init__(self, on_labels_fn):
        self._on_labels = on_labels_fn

    def on_labels(self, xs: tuple, ys: tuple) -> bool:
        return self._on_labels(xs, ys)

    def __call__(self, sample) -> bool:
        pairs = sample.pairs if isinstance(sample, Sample) else tuple(sample)
        return self._on_labels(tuple(x for x, _ in pairs), tuple(y for _, y in pairs))


# ---------------------------------------------------------------------------
# partial binary


@dataclass
class BinaryPredictor:
    model: BoostedModel
    learner: object

    def predict(self, x) -> int:
        return adaboost_predict(self.model, x, self.learner)


def fit_realizable_partial(
    sample: Sample, weak: WeakSpec, eta: float, delta: float, con_oracle, rng: RandomStream,
) -> BinaryPredictor:
    params = weak.learner_params()
    learner = make_weak_learner(params, con_oracle, weak.memoize)
    rounds = boosting_rounds(len(sample), delta, eta, 4)
    model = adaboost_train(sample, learner, weak.m, rounds, rng, weak_params=_params_dict(weak))
    return BinaryPredictor(model, learner)


def realizable_partial(sample, x, weak, eta, delta, con_oracle, rng) -> int:
    return fit_realizable_partial(sample, weak, eta, delta, con_oracle, rng).predict(x)


def fit_agnostic_partial(
    sample: Sample, weak: WeakSpec, eta: float, delta: float,
    erm_oracle: ErmValueOracle, con_oracle, rng: RandomStream,
) -> BinaryPredictor:
    removal = sample_erm_binary(sample, erm_oracle)
    realizable = sample.subset([i for i, z in enumerate(removal) if z == 0])
    params = weak.learner_params()
    learner = make_weak_learner(params, con_oracle, weak.memoize)
    rounds = boosting_rounds(len(sample), delta, eta, 6)
    model = adaboost_train(realizable, learner, weak.m, rounds, rng, weak_params=_params_dict(weak))
    return BinaryPredictor(model, learner)


def agnostic_partial(sample, x, weak, eta, delta, erm_oracle, con_oracle, rng) -> int:
    return fit_agnostic_partial(sample, weak, eta, delta, erm_oracle, con_oracle, rng).predict(x)


# ---------------------------------------------------------------------------
# multiclass via menus


def menu_project(label: int, menu: tuple[int, int]):
    """A multiclass value seen through a menu (first, second): 0 on the first
    entry, 1 on the second, undefined elsewhere."""
    first, second = menu
    if first == second:
        raise ContractViolation("menus must pair distinct labels")
    if label == first:
        return 0
    if label == second:
        return 1
    return STAR


def menu_consistency_oracle(base_con_oracle) -> DerivedConsistencyOracle:
    """Consistency for menu examples through the base multiclass oracle: bit b
    on (x, (first, second)) demands h(x) be the b-th menu entry."""

    def on_labels(xs, ys):
        base_xs, base_ys = [], []
        for (x, menu), b in zip(xs, ys):
            base_xs.append(x)
            base_ys.append(menu[b])
        return base_con_oracle.on_labels(tuple(base_xs), tuple(base_ys))

    return DerivedConsistencyOracle(on_labels)


def menu_consistency(base_con_oracle, menu_sample) -> bool:
    """One base consistency call answering a menu-example sample."""
    return menu_consistency_oracle(base_con_oracle)(menu_sample)


def build_menu_sample(sample: Sample, num_classes: int) -> Sample:
    """The 2n(K-1) menu examples: first every (x_i, (y_i, other)) labeled 0,
    then every (x_i, (other, y_i)) labeled 1, in index-major order."""
    zeros, ones = [], []
    for x, y in sample.pairs:
        for other in range(1, num_classes + 1):
            if other == y:
                continue
            zeros.append(((x, (y, other)), 0))
            ones.append(((x, (other, y)), 1))
    return Sample(zeros + ones)


def all_menus(num_classes: int) -> list[tuple[int, int]]:
    return [
        (a, b)
        for a in range(1, num_classes + 1)
        for b in range(1, num_classes + 1)
        if a != b
    ]


def materialize_menu_class(base: FiniteTableClass) -> FiniteTableClass:
    """The menu encoding of a finite multiclass table as an explicit partial
    binary table over (point, menu) inputs; for dimension cross-checks."""
    menus = all_menus(base.num_classes)
    points = tuple((x, mu) for x in base.domain for mu in menus)
    rows = {
        tuple(menu_project(row[base._column(x)], mu) for (x, mu) in points)
        for row in base.table
    }
    return FiniteTableClass(points, sorted(rows, key=_row_key), "binary")


def materialize_threshold_class(base: FiniteTableClass, gamma) -> FiniteTableClass:
    """The threshold encoding of a finite real-valued table as an explicit
    partial binary table over (point, threshold) inputs."""
    gamma = as_fraction(gamma)
    points = tuple((x, tau) for x in base.domain for tau in threshold_grid(gamma))
    rows = {
        tuple(threshold_project(row[base._column(x)], tau, gamma) for (x, tau) in points)
        for row in base.table
    }
    return FiniteTableClass(points, sorted(rows, key=_row_key), "binary")


def _row_key(row):
    return tuple(2 if v is STAR else v for v in row)


def decode_multiclass(j_eval, x, num_classes: int) -> int:
    """The unique label k with J(x,(k,l))=0 and J(x,(l,k))=1 for every other l,
    scanning candidates in order; defaults to 1 when no candidate qualifies."""
    if num_classes < 2:
        raise ContractViolation("need at least two classes")
    for k in range(1, num_classes + 1):
        if all(
            j_eval(x, (k, other)) == 0 and j_eval(x, (other, k)) == 1
            for other in range(1, num_classes + 1)
            if other != k
        ):
            return k
    return 1


@dataclass
class MulticlassPredictor:
    model: BoostedModel
    learner: object
    num_classes: int

    def j_eval(self, x, menu) -> int:
        return adaboost_predict(self.model, (x, menu), self.learner)

    def predict(self, x) -> int:
        return decode_multiclass(self.j_eval, x, self.num_classes)


def fit_multiclass_realizable(
    sample: Sample, num_classes: int, weak: WeakSpec, eta: float, delta: float,
    con_oracle, rng: RandomStream,
) -> MulticlassPredictor:
    menu_sample = build_menu_sample(sample, num_classes)
    menu_oracle = menu_consistency_oracle(con_oracle)
    params = weak.learner_params()
    learner = make_weak_learner(params, menu_oracle, weak.memoize, total=True)
    rounds = boosting_rounds(len(sample) * num_classes, delta, eta, 4)
    model = adaboost_train(menu_sample, learner, weak.m, rounds, rng, weak_params=_params_dict(weak))
    return MulticlassPredictor(model, learner, num_classes)


def multiclass_realizable(sample, x, num_classes, weak, eta, delta, con_oracle, rng) -> int:
    return fit_multiclass_realizable(
        sample, num_classes, weak, eta, delta, con_oracle, rng
    ).predict(x)


def fit_multiclass_agnostic(
    sample: Sample, num_classes: int, weak: WeakSpec, eta: float, delta: float,
    erm_oracle: ErmValueOracle, con_oracle, rng: RandomStream,
) -> MulticlassPredictor:
    removal = sample_erm_binary(sample, erm_oracle)
    kept = sample.subset([i for i, z in enumerate(removal) if z == 0])
    return fit_multiclass_realizable(kept, num_classes, weak, eta, delta, con_oracle, rng)


def multiclass_agnostic(sample, x, num_classes, weak, eta, delta, erm_oracle, con_oracle, rng) -> int:
    return fit_multiclass_agnostic(
        sample, num_classes, weak, eta, delta, erm_oracle, con_oracle, rng
    ).predict(x)


# ---------------------------------------------------------------------------
# regression via thresholds


def threshold_grid(gamma) -> tuple[Fraction, ...]:
    gamma = as_fraction(gamma)
    if not (0 < gamma < 1):
        raise ContractViolation("grid width must lie in (0,1)")
    count = int(Fraction(1) / gamma)  # floor
    return tuple(gamma * k for k in range(count + 1))


def threshold_project(value, tau, gamma):
    """A real value seen at threshold tau: 1 when at least gamma above, 0 when
    at least gamma below, undefined inside the band."""
    value, tau, gamma = as_fraction(value), as_fraction(tau), as_fraction(gamma)
    if value >= tau + gamma:
        return 1
    if value <= tau - gamma:
        return 0
    return STAR


def threshold_consistency_oracle(range_query, gamma) -> DerivedConsistencyOracle:
    """Consistency for threshold examples via one range query: bit 1 at
    (x, tau) demands h(x) in [tau+gamma, 1], bit 0 demands [0, tau-gamma].
    Bands outside [0,1] are unsatisfiable outright."""
    gamma = as_fraction(gamma)

    def on_labels(xs, ys):
        triples = []
        for (x, tau), b in zip(xs, ys):
            tau = as_fraction(tau)
            if b == 1:
                lo = tau + gamma
                if lo > 1:
                    return False
                triples.append((x, lo, Fraction(1)))
            else:
                hi = tau - gamma
                if hi < 0:
                    return False
                triples.append((x, Fraction(0), hi))
        return range_query(triples)

    return DerivedConsistencyOracle(on_labels)


def synthesized_range_query(erm_oracle: ErmValueOracle):
    """A range-consistency answer computed from one weak-ERM call on the
    doubled sample (twice the examples of the range query)."""

    def query(triples) -> bool:
        return sample_con_real(triples, erm_oracle)

    return query


def build_threshold_sample(sample: Sample, gamma, beta) -> Sample:
    """Threshold examples at margin beta, skipping in-band (undefined) entries;
    at most 2n*(floor(1/gamma)+1) of them."""
    beta = as_fraction(beta)
    out = []
    for x, y in sample.pairs:
        y = as_fraction(y)
        for tau in threshold_grid(gamma):
            if y >= tau + beta:
                out.append(((x, tau), 1))
            elif y <= tau - beta:
                out.append(((x, tau), 0))
    return Sample(out)


@dataclass
class RegressionPredictor:
    model: BoostedModel
    learner: object
    gamma: Fraction

    def j_eval(self, x, tau) -> int:
        return adaboost_predict(self.model, (x, tau), self.learner)

    def predict(self, x) -> Fraction:
        """gamma times the number of thresholds voted 1; not clamped to [0,1]."""
        return self.gamma * sum(self.j_eval(x, tau) for tau in threshold_grid(self.gamma))


def fit_reg_realizable(
    sample: Sample, weak: WeakSpec, eta: float, delta: float, gamma, beta,
    range_query, rng: RandomStream,
) -> RegressionPredictor:
    gamma = as_fraction(gamma)
    beta = as_fraction(beta)
    if beta < gamma:
        raise ContractViolation("margin beta must be at least the grid width")
    thr_sample = build_threshold_sample(sample, gamma, beta)
    thr_oracle = threshold_consistency_oracle(range_query, gamma)
    params = weak.learner_params()
    learner = make_weak_learner(params, thr_oracle, weak.memoize, total=True)
    rounds = boosting_rounds(len(sample), delta, eta, 4)
    model = adaboost_train(thr_sample, learner, weak.m, rounds, rng, weak_params=_params_dict(weak))
    return RegressionPredictor(model, learner, gamma)


def reg_realizable(sample, x, weak, eta, delta, gamma, beta, range_oracle, rng) -> Fraction:
    return fit_reg_realizable(
        sample, weak, eta, delta, gamma, beta, range_oracle, rng
    ).predict(x)


def fit_reg_agnostic(
    sample: Sample, weak: WeakSpec, eta: float, delta: float, gamma,
    erm_oracle: ErmValueOracle, rng: RandomStream,
) -> RegressionPredictor:
    gamma = as_fraction(gamma)
    if gamma.numerator != 1:
        raise ContractViolation("agnostic regression needs gamma = 1/G")
    pinned = sample_erm_real(sample, gamma / 2, erm_oracle)
    snapped = Sample(list(zip(sample.xs, pinned)))
    return fit_reg_realizable(
        snapped, weak, eta, delta, gamma, 2 * gamma,
        synthesized_range_query(erm_oracle), rng,
    )


def reg_agnostic(sample, x, weak, eta, delta, gamma, erm_oracle, rng) -> Fraction:
    return fit_reg_agnostic(sample, weak, eta, delta, gamma, erm_oracle, rng).predict(x)


def _params_dict(weak: WeakSpec) -> dict:
    params = weak.learner_params()
    return {
        "m": weak.m,
        "c1": weak.c1,
        "lam": weak.lam,
        "gamma": params.gamma,
        "trials": params.trials,
        "horizon": params.horizon,
    }

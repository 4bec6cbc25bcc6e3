"""The oracle-efficient weak learner for realizable partial binary samples.

Given a realizable context sample and a query point, the learner forms the two
completions of the label pattern, discards one if the consistency oracle rules
it out, and otherwise orients the corresponding one-inclusion-graph edge by
comparing Monte-Carlo exit-time potentials of the two completion vertices.
The output bit is a Bernoulli draw from that orientation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .core import ContractViolation, RandomStream, Sample, loss_bin
from .oig import WalkParams, default_horizon, estimate_potential


class RealizabilityViolation(RuntimeError):
    """Both completions were rejected: the input sample is not realizable
    (or the oracle is broken)."""


@dataclass(frozen=True)
class WeakLearnerParams:
    """Walk discount/trials plus the orientation sharpness lambda.

    The defaults derived by `paper_default_params` scale the discount toward 1
    and the trial count quadratically with the pattern dimension.
    """

    gamma: float
    lam: float
    trials: int
    horizon: int
    c1: float = 1.0

    def walk_params(self) -> WalkParams:
        return WalkParams(self.gamma, self.horizon, self.trials)


@dataclass(frozen=True)
class WeakPrediction:
    bit: int
    sigma_hat: float


_GAMMA_FLOOR = 0.5
_GAMMA_CEIL = 1 - 1e-6


def paper_default_params(m: int, c1: float = 1.0, lam: float = 1.0) -> WeakLearnerParams:
    """Default discount 1 - 1/(c1*m*log m), unit lambda, c1*m^2*log^3 m trials.

    At small m the discount formula exits (0,1), so it is clamped into
    [1/2, 1-1e-6]; trial counts are rounded up and kept >= 1.
    """
    if m < 2:
        raise ContractViolation("weak-learner defaults need m >= 2")
    if c1 <= 0:
        raise ContractViolation("c1 must be positive")
    log_m = math.log(m)
    gamma = 1 - 1 / (c1 * m * log_m)
    gamma = min(max(gamma, _GAMMA_FLOOR), _GAMMA_CEIL)
    trials = max(1, math.ceil(c1 * m * m * log_m**3))
    return WeakLearnerParams(gamma, lam, trials, default_horizon(gamma), c1)


def weak_realizable(
    sample: Sample,
    x,
    params: WeakLearnerParams,
    con_oracle,
    rng: RandomStream,
    memoize: bool = True,
    potential=None,
    total: bool = False,
) -> WeakPrediction:
    """Predict the label of x from a realizable sample, via one oracle-driven
    edge orientation.

    The stream is re-keyed by a stable hash of x, so repeated evaluations of
    the same fitted hypothesis at the same point replay identically while
    distinct points stay independent.  `potential`, if given, is a test hook
    (points, vertex) -> value replacing the Monte-Carlo estimator.

    When both completions are rejected the input was unrealizable: by default
    that raises, but `total=True` keeps the literal check order (the failing
    0-completion answers first) and returns 1.  Decoders for the multiclass
    and threshold encodings evaluate the learner at points whose class-true
    value is 'undefined', and rely on that total mode.
    """
    base = tuple(sample.ys)
    if any(y not in (0, 1) for y in base):
        raise ContractViolation("weak learner requires labels in {0,1}")
    points = sample.xs + (x,)
    y0 = base + (0,)
    y1 = base + (1,)
    gen = rng.child_for(x).generator()
    feasible0 = con_oracle.on_labels(points, y0)
    feasible1 = con_oracle.on_labels(points, y1)
    if not feasible0 and not feasible1:
        if total:
            return WeakPrediction(1, 1.0)
        raise RealizabilityViolation(
            "neither completion of the query point is consistent with the class"
        )
    if not feasible0:
        return WeakPrediction(1, 1.0)
    if not feasible1:
        return WeakPrediction(0, 0.0)
    if potential is not None:
        f0 = float(potential(points, y0))
        f1 = float(potential(points, y1))
    else:
        walk = params.walk_params()
        f0 = estimate_potential(points, y0, walk, con_oracle, gen, memoize=memoize).value
        f1 = estimate_potential(points, y1, walk, con_oracle, gen, memoize=memoize).value
    sigma_hat = (1 + params.lam * (f0 - f1)) / 2
    sigma_hat = min(max(sigma_hat, 0.0), 1.0)
    bit = 1 if gen.random() < sigma_hat else 0
    return WeakPrediction(bit, sigma_hat)


def max_oracle_calls(params: WeakLearnerParams) -> int:
    """Ceiling on consistency queries per prediction in unmemoized mode: the
    two completion checks plus two potential estimates of at most
    trials*(horizon+1) probes each."""
    return 2 + 2 * params.trials * (params.horizon + 1)


def transductive_error(
    sample: Sample,
    params: WeakLearnerParams,
    con_oracle,
    reps: int,
    rng: RandomStream,
    memoize: bool = True,
    potential=None,
) -> float:
    """Monte-Carlo leave-one-out loss: each point predicted from the others."""
    m = len(sample)
    if m == 0:
        raise ContractViolation("transductive error needs a nonempty sample")
    total = 0
    for rep in range(reps):
        rep_stream = rng.child(rep)
        for i in range(m):
            x, y = sample[i]
            pred = weak_realizable(
                sample.without(i), x, params, con_oracle, rep_stream.child(i),
                memoize=memoize, potential=potential,
            )
            total += loss_bin(y, pred.bit)
    return total / (reps * m)


def exact_transductive_sigma(sample: Sample, con_oracle, potential, lam: float) -> float:
    """Expected leave-one-out loss when predictions use the given exact
    potential instead of estimates: the mean of (1 - orientation mass on the
    true completion) over indices whose flipped completion is feasible."""
    m = len(sample)
    points = sample.xs
    truth = tuple(sample.ys)
    total = 0.0
    for i in range(m):
        other = truth[:i] + (1 - truth[i],) + truth[i + 1 :]
        if not con_oracle.on_labels(points, other):
            continue  # forced prediction, zero loss
        f_true = float(potential(points, truth))
        f_other = float(potential(points, other))
        sigma_true = (1 + lam * (f_other - f_true)) / 2
        total += 1 - min(max(sigma_true, 0.0), 1.0)
    return total / m


def loo_distributional_error(
    distribution,
    m: int,
    params: WeakLearnerParams,
    con_oracle,
    reps: int,
    rng: RandomStream,
    memoize: bool = True,
) -> float:
    """Monte-Carlo estimate of the expected loss of the learner on a fresh
    point after seeing m-1 i.i.d. examples."""
    if m < 1:
        raise ContractViolation("need m >= 1")
    total = 0
    for rep in range(reps):
        rep_stream = rng.child(rep)
        gen = rep_stream.child(0).generator()
        drawn = distribution.draw(gen, m)
        context = Sample(drawn.pairs[: m - 1])
        x, y = drawn.pairs[m - 1]
        pred = weak_realizable(context, x, params, con_oracle, rep_stream.child(1), memoize=memoize)
        total += loss_bin(y, pred.bit)
    return total / reps

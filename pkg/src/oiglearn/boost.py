"""AdaBoost over a randomized weak learner, with deterministic replay.

Each round resamples a small dataset from the current weights, fits the weak
learner with a fresh child stream, and reweights by the usual exponential
rule.  The trained model stores only (sample indices, alpha, stream label) per
round: hypothesis evaluations are replayed on demand from the same stream, so
prediction is a fixed function of the model and the query point.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from .core import ContractViolation, RandomStream, Sample

# weak learner contract: (sample, point, stream) -> bit in {0,1}
WeakLearner = Callable[[Sample, object, RandomStream], int]


def epsilon_alpha(dist: np.ndarray, h_bits, y_bits) -> tuple[float, float]:
    """Weighted error of the round hypothesis and its vote weight.

    alpha is +inf / -inf at the degenerate errors 0 / 1; callers early-stop
    there, keeping the single (possibly negated) hypothesis.
    """
    h = np.asarray(h_bits)
    y = np.asarray(y_bits)
    eps = float(dist[h != y].sum())
    if eps <= 0.0:
        return 0.0, math.inf
    if eps >= 1.0:
        return 1.0, -math.inf
    return eps, 0.5 * math.log((1 - eps) / eps)


def reweight(dist: np.ndarray, alpha: float, h_bits, y_bits) -> tuple[np.ndarray, float]:
    """Exponential reweighting; returns the new distribution and the
    normalizer Z (in the unnormalized pre-division scale)."""
    if not math.isfinite(alpha):
        raise ContractViolation("reweighting needs a finite alpha")
    h = np.asarray(h_bits, dtype=np.float64)
    y = np.asarray(y_bits, dtype=np.float64)
    w = dist * np.exp(-alpha * (2 * y - 1) * (2 * h - 1))
    z = float(w.sum())
    return w / z, z


@dataclass(frozen=True)
class BoostRound:
    indices: tuple[int, ...]  # positions of the round sample inside the training sample
    alpha: float
    label: int  # child-stream label used for sampling and for the weak learner


@dataclass
class BoostedModel:
    sample: Sample
    rounds: tuple[BoostRound, ...]
    stream: RandomStream
    weak_sample_size: int
    early_stop: bool = False
    train_error: Fraction | None = None
    z_product: float | None = None
    weak_params: dict | None = None
    _caches: list[dict] = field(default_factory=list, repr=False)

    def __post_init__(self):
        if not self._caches:
            self._caches = [dict() for _ in self.rounds]

    def round_stream(self, round_: BoostRound) -> RandomStream:
        return self.stream.child(round_.label).child(1)

    def round_sample(self, round_: BoostRound) -> Sample:
        return self.sample.subset(round_.indices)


def adaboost_train(
    sample: Sample,
    weak: WeakLearner,
    weak_sample_size: int,
    rounds: int,
    rng: RandomStream,
    weak_params: dict | None = None,
) -> BoostedModel:
    """Run `rounds` boosting rounds of the weak learner on the sample.

    Labels must be 0/1.  If a round's weighted error hits 0 (or 1) exactly the
    loop stops and the model is that single hypothesis (negated for error 1).
    The returned model carries its exact training error and the product of the
    round normalizers, which always bounds it.
    """
    n = len(sample)
    if n == 0:
        return BoostedModel(sample, (), rng, weak_sample_size, weak_params=weak_params)
    y = np.array([1 if lab == 1 else 0 for lab in sample.ys], dtype=np.int8)
    if any(lab not in (0, 1) for lab in sample.ys):
        raise ContractViolation("boosting requires binary 0/1 labels")
    xs = sample.xs
    dist = np.full(n, 1.0 / n)
    kept: list[BoostRound] = []
    caches: list[dict] = []
    eval_rows: list[np.ndarray] = []
    zs: list[float] = []
    early = False
    for t in range(rounds):
        round_stream = rng.child(t)
        gen = round_stream.child(0).generator()
        cum = np.cumsum(dist)
        cum[-1] = 1.0
        idx = np.searchsorted(cum, gen.random(weak_sample_size), side="right")
        round_sample = sample.subset(idx)
        learner_stream = round_stream.child(1)
        cache: dict = {}
        bits = np.empty(n, dtype=np.int8)
        for i, x in enumerate(xs):
            b = cache.get(x)
            if b is None:
                b = weak(round_sample, x, learner_stream)
                cache[x] = b
            bits[i] = b
        eps, alpha = epsilon_alpha(dist, bits, y)
        if not math.isfinite(alpha):
            kept = [BoostRound(tuple(int(i) for i in idx), alpha, t)]
            caches = [cache]
            eval_rows = [bits]
            zs = []
            early = True
            break
        kept.append(BoostRound(tuple(int(i) for i in idx), alpha, t))
        caches.append(cache)
        eval_rows.append(bits)
        dist, z = reweight(dist, alpha, bits, y)
        zs.append(z)
        total = dist.sum()
        if abs(total - 1.0) > 1e-12:
            raise RuntimeError(f"round weights drifted from 1 by {abs(total - 1.0)}")
    model = BoostedModel(
        sample,
        tuple(kept),
        rng,
        weak_sample_size,
        early_stop=early,
        weak_params=weak_params,
        _caches=caches,
    )
    votes = _vote_bits(model.rounds, eval_rows, n)
    model.train_error = Fraction(int(np.count_nonzero(votes != y)), n)
    model.z_product = float(np.prod(zs)) if zs else (0.0 if early else 1.0)
    if not early and model.train_error > model.z_product + 1e-9:
        raise RuntimeError("training error exceeded the normalizer product bound")
    return model


def _vote_bits(rounds, eval_rows, n) -> np.ndarray:
    if not rounds:
        return np.ones(n, dtype=np.int8)  # empty vote: sign(0) reads as 1
    first_alpha = rounds[0].alpha
    if not math.isfinite(first_alpha):
        bits = eval_rows[0]
        return bits if first_alpha > 0 else 1 - bits
    score = np.zeros(n)
    for round_, bits in zip(rounds, eval_rows):
        score += round_.alpha * (2 * bits.astype(np.float64) - 1)
    return (score >= 0).astype(np.int8)


def adaboost_predict(model: BoostedModel, x, weak: WeakLearner) -> int:
    """Weighted-majority vote at x, replaying each round's hypothesis from its
    stored stream label; sign(0) votes 1."""
    if not model.rounds:
        return 1
    score = 0.0
    for round_, cache in zip(model.rounds, model._caches):
        b = cache.get(x)
        if b is None:
            b = weak(model.round_sample(round_), x, model.round_stream(round_))
            cache[x] = b
        if not math.isfinite(round_.alpha):
            return b if round_.alpha > 0 else 1 - b
        score += round_.alpha * (2 * b - 1)
    return 1 if score >= 0 else 0


def model_to_json(model: BoostedModel) -> str:
    """Serialize everything needed to replay predictions against the original
    training sample: weak-learner parameters, per-round sample indices, alphas
    at full precision, and stream labels."""
    payload = {
        "format": "boosted-model/1",
        "stream": {"seed": model.stream.seed, "path": list(model.stream.path)},
        "weak_sample_size": model.weak_sample_size,
        "weak_params": model.weak_params,
        "early_stop": model.early_stop,
        "rounds": [
            {
                "indices": list(r.indices),
                "alpha": _format_alpha(r.alpha),
                "label": r.label,
            }
            for r in model.rounds
        ],
    }
    return json.dumps(payload, indent=2)


def model_from_json(text: str, sample: Sample) -> BoostedModel:
    payload = json.loads(text)
    if payload.get("format") != "boosted-model/1":
        raise ContractViolation("not a serialized boosted model")
    stream = RandomStream(payload["stream"]["seed"], tuple(payload["stream"]["path"]))
    rounds = tuple(
        BoostRound(tuple(r["indices"]), float(r["alpha"]), r["label"])
        for r in payload["rounds"]
    )
    return BoostedModel(
        sample,
        rounds,
        stream,
        payload["weak_sample_size"],
        early_stop=payload["early_stop"],
        weak_params=payload.get("weak_params"),
    )


def _format_alpha(alpha: float) -> str:
    if alpha == math.inf:
        return "inf"
    if alpha == -math.inf:
        return "-inf"
    return format(alpha, ".17g")

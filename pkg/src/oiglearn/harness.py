"""Seeded experiment runner: config in, per-trial error/cost metrics out.

Each trial draws a training sample from the configured finite distribution
with a per-trial child stream, fits the selected pipeline, and evaluates the
held-out error exactly by weighted enumeration over the distribution's
support (no evaluation sampling noise).  Reports serialize to CSV or JSONL
with fixed 17-significant-digit formatting, so identical seeds give identical
bytes; wall-clock measurement can be disabled to make entire files
reproducible.
"""

from __future__ import annotations

import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import IO

from .brute import exact_transductive_audit
from .classes import class_from_config, parse_points
from .core import (
    ContractViolation,
    FiniteDistribution,
    RandomStream,
    as_fraction,
    empirical_error,
    loss_abs,
    loss_bin,
    loss_mc,
)
from .oracle import (
    CONSISTENCY,
    ERM_VALUE,
    RANGE_CONSISTENCY,
    ConsistencyOracle,
    ErmValueOracle,
    OracleCapabilityError,
    QueryCostLedger,
    RangeConsistencyOracle,
)
from .pipelines import (
    WeakSpec,
    fit_agnostic_partial,
    fit_multiclass_agnostic,
    fit_multiclass_realizable,
    fit_realizable_partial,
    fit_reg_agnostic,
    fit_reg_realizable,
)
from .weak import paper_default_params, transductive_error

PIPELINES = (
    "realizable_partial",
    "agnostic_partial",
    "multiclass_realizable",
    "multiclass_agnostic",
    "reg_realizable",
    "reg_agnostic",
    "weak_transductive",
    "audit",
)

_NEEDED_CAPABILITIES = {
    "realizable_partial": {CONSISTENCY},
    "agnostic_partial": {CONSISTENCY, ERM_VALUE},
    "multiclass_realizable": {CONSISTENCY},
    "multiclass_agnostic": {CONSISTENCY, ERM_VALUE},
    "reg_realizable": {RANGE_CONSISTENCY},
    "reg_agnostic": {ERM_VALUE},
    "weak_transductive": {CONSISTENCY},
    "audit": {CONSISTENCY},
}


class ConfigError(ValueError):
    """The experiment configuration could not be parsed or validated."""


@dataclass(frozen=True)
class ExperimentConfig:
    class_spec: dict
    support: tuple
    weights: tuple | None
    label_noise: Fraction
    pipeline: str
    n: int
    m: int
    c1: float
    lam: float
    eta: float
    delta: float
    gamma: Fraction | None
    beta: Fraction | None
    num_classes: int | None
    trials: int
    seed: int
    reps: int
    memoize: bool

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        try:
            pipeline = raw["pipeline"]
            if pipeline not in PIPELINES:
                raise ConfigError(f"unknown pipeline {pipeline!r}")
            dist = raw["distribution"]
            support = tuple(
                (_parse_point(x), _parse_label(y, pipeline)) for x, y in dist["support"]
            )
            weights = dist.get("weights")
            if weights is not None:
                weights = tuple(as_fraction(w) for w in weights)
            m = int(raw.get("m", 3))
            if m < 2:
                raise ConfigError("weak sample size m must be at least 2")
            eta = raw.get("eta")
            eta = float(eta) if eta is not None else 1.0 / (m * math.log(m))
            gamma = raw.get("gamma")
            beta = raw.get("beta")
            return cls(
                class_spec=raw["class"],
                support=support,
                weights=weights,
                label_noise=as_fraction(dist.get("label_noise", 0)),
                pipeline=pipeline,
                n=int(raw.get("n", 10)),
                m=m,
                c1=float(raw.get("C1", raw.get("c1", 1.0))),
                lam=float(raw.get("lambda", 1.0)),
                eta=eta,
                delta=float(raw.get("delta", 0.2)),
                gamma=as_fraction(gamma) if gamma is not None else None,
                beta=as_fraction(beta) if beta is not None else None,
                num_classes=raw.get("num_classes"),
                trials=int(raw.get("trials", 1)),
                seed=int(raw["seed"]),
                reps=int(raw.get("reps", 50)),
                memoize=bool(raw.get("memoize", True)),
            )
        except ConfigError:
            raise
        except (KeyError, TypeError, ValueError, ContractViolation) as exc:
            raise ConfigError(f"bad experiment config: {exc}") from exc

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        try:
            with open(path) as fh:
                raw = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        return cls.from_dict(raw)

    def with_seed(self, seed: int) -> "ExperimentConfig":
        return ExperimentConfig(**{**self.__dict__, "seed": seed})

    def weak_spec(self) -> WeakSpec:
        return WeakSpec(self.m, self.c1, self.lam, self.memoize)


def _parse_point(x):
    return parse_points([x])[0]


def _parse_label(y, pipeline):
    if pipeline.startswith("reg"):
        return as_fraction(y)
    return int(y)


@dataclass(frozen=True)
class TrialReport:
    trial: int
    train_err: float
    test_err: float
    oracle_calls: int
    query_cost: int
    wall_ms: int
    seed: int


def build_distribution(config: ExperimentConfig) -> FiniteDistribution:
    if config.weights is None:
        dist = FiniteDistribution.uniform(config.support)
    else:
        dist = FiniteDistribution(config.support, config.weights)
    if config.label_noise != 0:
        if config.pipeline.startswith("multiclass"):
            if config.num_classes is None:
                raise ConfigError("label noise for multiclass needs num_classes")
            dist = dist.with_multiclass_label_noise(config.label_noise, config.num_classes)
        else:
            dist = dist.with_binary_label_noise(config.label_noise)
    return dist


def validate_capabilities(config: ExperimentConfig, concept_class) -> None:
    missing = _NEEDED_CAPABILITIES[config.pipeline] - set(concept_class.capabilities)
    if missing:
        raise OracleCapabilityError(
            f"pipeline {config.pipeline} needs oracle(s) {sorted(missing)} "
            f"that {type(concept_class).__name__} does not implement"
        )


def run_trial(config: ExperimentConfig, concept_class, distribution, trial: int,
              measure_wall: bool = True) -> TrialReport:
    stream = RandomStream(config.seed).child(trial)
    ledger = QueryCostLedger()
    started = time.perf_counter() if measure_wall else 0.0
    gen = stream.child(0).generator()
    sample = distribution.draw(gen, config.n)
    fit_stream = stream.child(1)
    weak = config.weak_spec()
    train_err, test_err = _dispatch(
        config, concept_class, distribution, sample, weak, ledger, fit_stream
    )
    wall_ms = int(round((time.perf_counter() - started) * 1000)) if measure_wall else 0
    cost, calls = ledger.snapshot()
    return TrialReport(
        trial=trial,
        train_err=float(train_err),
        test_err=float(test_err),
        oracle_calls=calls,
        query_cost=cost,
        wall_ms=wall_ms,
        seed=config.seed,
    )


def _dispatch(config, concept_class, distribution, sample, weak, ledger, rng):
    pipeline = config.pipeline
    if pipeline == "realizable_partial":
        con = ConsistencyOracle(concept_class, ledger)
        predictor = fit_realizable_partial(sample, weak, config.eta, config.delta, con, rng)
        return _binary_errors(predictor, sample, distribution)
    if pipeline == "agnostic_partial":
        con = ConsistencyOracle(concept_class, ledger)
        erm = ErmValueOracle(concept_class, loss_bin, ledger)
        predictor = fit_agnostic_partial(sample, weak, config.eta, config.delta, erm, con, rng)
        return _binary_errors(predictor, sample, distribution)
    if pipeline == "multiclass_realizable":
        k = _need_classes(config)
        con = ConsistencyOracle(concept_class, ledger)
        predictor = fit_multiclass_realizable(sample, k, weak, config.eta, config.delta, con, rng)
        return _point_errors(predictor, sample, distribution, loss_mc)
    if pipeline == "multiclass_agnostic":
        k = _need_classes(config)
        con = ConsistencyOracle(concept_class, ledger)
        erm = ErmValueOracle(concept_class, loss_mc, ledger)
        predictor = fit_multiclass_agnostic(
            sample, k, weak, config.eta, config.delta, erm, con, rng
        )
        return _point_errors(predictor, sample, distribution, loss_mc)
    if pipeline == "reg_realizable":
        gamma = _need_gamma(config)
        beta = config.beta if config.beta is not None else gamma
        range_query = RangeConsistencyOracle(concept_class, ledger)
        predictor = fit_reg_realizable(
            sample, weak, config.eta, config.delta, gamma, beta, range_query, rng
        )
        return _regression_errors(predictor, sample, distribution)
    if pipeline == "reg_agnostic":
        gamma = _need_gamma(config)
        erm = ErmValueOracle(concept_class, loss_abs, ledger)
        predictor = fit_reg_agnostic(sample, weak, config.eta, config.delta, gamma, erm, rng)
        return _regression_errors(predictor, sample, distribution)
    if pipeline == "weak_transductive":
        # leave-one-out contexts have size n-1, so the walk parameters come
        # from the sample size rather than the boosting weak-sample size
        params = paper_default_params(config.n, config.c1, config.lam)
        con = ConsistencyOracle(concept_class, ledger)
        measured = transductive_error(
            sample, params, con, config.reps, rng, memoize=config.memoize
        )
        audit = exact_transductive_audit(
            concept_class, sample, params.gamma, config.lam, walk="flip"
        )
        return measured, audit.loo_error
    if pipeline == "audit":
        params = paper_default_params(config.n, config.c1, config.lam)
        con = ConsistencyOracle(concept_class, ledger)  # surfaces capability mismatch early
        audit = exact_transductive_audit(
            concept_class, sample, params.gamma, config.lam, walk="lazy"
        )
        return audit.loo_error, audit.slack
    raise ConfigError(f"unknown pipeline {pipeline!r}")


def _need_classes(config) -> int:
    if config.num_classes is None:
        raise ConfigError("multiclass pipelines need num_classes")
    return int(config.num_classes)


def _need_gamma(config) -> Fraction:
    if config.gamma is None:
        raise ConfigError("regression pipelines need gamma")
    return config.gamma


def _binary_errors(predictor, sample, distribution):
    train = empirical_error(sample, predictor.predict, loss_bin)
    test = distribution.expected_loss(predictor.predict, loss_bin)
    return train, test


def _point_errors(predictor, sample, distribution, loss):
    train = empirical_error(sample, predictor.predict, loss)
    test = distribution.expected_loss(predictor.predict, loss)
    return train, test


def _regression_errors(predictor, sample, distribution):
    # the vote sum can exceed 1; losses are reported against the clamped value
    def clamped(x):
        value = predictor.predict(x)
        return min(max(value, Fraction(0)), Fraction(1))

    train = empirical_error(sample, clamped, loss_abs)
    test = distribution.expected_loss(clamped, loss_abs)
    return train, test


def run_experiment(config: ExperimentConfig, jobs: int = 1,
                   measure_wall: bool = True) -> list[TrialReport]:
    concept_class = class_from_config(config.class_spec)
    validate_capabilities(config, concept_class)
    distribution = build_distribution(config)
    trials = range(config.trials)
    if jobs <= 1:
        return [
            run_trial(config, concept_class, distribution, t, measure_wall) for t in trials
        ]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        futures = [
            pool.submit(run_trial, config, concept_class, distribution, t, measure_wall)
            for t in trials
        ]
        reports = [f.result() for f in futures]
    return sorted(reports, key=lambda r: r.trial)


CSV_HEADER = "trial,train_err,test_err,oracle_calls,query_cost,wall_ms,seed"


def _fmt(value) -> str:
    if isinstance(value, bool):
        raise ContractViolation("unexpected boolean field")
    if isinstance(value, int):
        return str(value)
    return format(float(value), ".17g")


def emit_report(reports: list[TrialReport], fmt: str, sink: IO[str]) -> None:
    """Write one line per trial; field order and number formatting are fixed."""
    if fmt == "csv":
        sink.write(CSV_HEADER + "\n")
        for r in reports:
            sink.write(
                ",".join(
                    (
                        str(r.trial),
                        _fmt(r.train_err),
                        _fmt(r.test_err),
                        str(r.oracle_calls),
                        str(r.query_cost),
                        str(r.wall_ms),
                        str(r.seed),
                    )
                )
                + "\n"
            )
    elif fmt == "jsonl":
        for r in reports:
            sink.write(
                json.dumps(
                    {
                        "trial": r.trial,
                        "train_err": float(_fmt(r.train_err)),
                        "test_err": float(_fmt(r.test_err)),
                        "oracle_calls": r.oracle_calls,
                        "query_cost": r.query_cost,
                        "wall_ms": r.wall_ms,
                        "seed": r.seed,
                    }
                )
                + "\n"
            )
    else:
        raise ConfigError(f"unknown report format {fmt!r}")

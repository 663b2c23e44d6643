"""Classifier-based estimation of the score density ratio process.

One logistic classifier is fit per step t on raw score prefixes of length t,
up to the largest step at which both labels still have data. Beyond that
step the statistic is frozen: evaluation always sees the earliest scores, so
the monitored value is literally constant from then on.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import EmptyPrefix, NoOverlap, SingleClassData
from .kernels import FitConfig, LogisticModel, fit_logistic, predict_proba
from .trajectories import CalibrationSet, ScoreSequence


@dataclass(frozen=True)
class RatioModel:
    """Per-step classifiers plus the class-prior estimate they plug into."""

    step_models: tuple
    prior_1: float
    t_max: int
    fit_config: FitConfig

    def __post_init__(self):
        if len(self.step_models) != self.t_max:
            raise ValueError(
                f"expected {self.t_max} step models, got {len(self.step_models)}"
            )
        if not (0.0 < self.prior_1 < 1.0):
            raise ValueError(f"prior_1 must lie strictly in (0, 1), got {self.prior_1}")


def estimate_prior(dre: CalibrationSet) -> float:
    """Empirical frequency of label-1 trajectories."""
    labels = dre.labels()
    if len(set(labels)) < 2:
        raise SingleClassData("prior estimation needs both labels present")
    return sum(labels) / len(labels)


def compute_tmax(dre: CalibrationSet) -> int:
    """Largest t whose prefix set {trajectories with length >= t} still
    contains both labels."""
    max_len = {0: 0, 1: 0}
    for item in dre:
        max_len[item.label] = max(max_len[item.label], len(item))
    t_max = min(max_len[0], max_len[1])
    if t_max < 1:
        raise NoOverlap("need score sequences of both labels")
    return t_max


def fit_ratio_model(dre: CalibrationSet, cfg: FitConfig = FitConfig()) -> RatioModel:
    """Fit one prefix classifier per step t = 1..t_max."""
    prior_1 = estimate_prior(dre)
    t_max = compute_tmax(dre)
    step_models = []
    for t in range(1, t_max + 1):
        feats = [item.scores[:t] for item in dre if len(item) >= t]
        labels = [item.label for item in dre if len(item) >= t]
        step_models.append(fit_logistic(feats, labels, cfg))
    return RatioModel(
        step_models=tuple(step_models), prior_1=prior_1, t_max=t_max, fit_config=cfg
    )


def eval_ratio(model: RatioModel, prefix) -> float:
    """Plug-in density ratio ((1-f)/f) * (prior_1/(1-prior_1)) at this prefix.

    Prefixes longer than t_max are truncated to their first t_max scores,
    freezing the statistic.
    """
    scores = getattr(prefix, "scores", prefix)
    t = len(scores)
    if t == 0:
        raise EmptyPrefix("cannot evaluate the ratio on an empty prefix")
    t_eff = min(t, model.t_max)
    f = predict_proba(
        model.step_models[t_eff - 1], scores[:t_eff], model.fit_config.prob_clamp
    )
    prior_odds = model.prior_1 / (1.0 - model.prior_1)
    return (1.0 - f) / f * prior_odds


def plugin_ratio(f: float, prior_1: float) -> float:
    """The bare plug-in formula, exposed for identity checks."""
    return (1.0 - f) / f * (prior_1 / (1.0 - prior_1))


def eval_process(model: RatioModel, seq: ScoreSequence) -> list:
    """Estimated ratio at every step of the sequence."""
    scores = getattr(seq, "scores", seq)
    out = []
    frozen = None
    for t in range(1, len(scores) + 1):
        if t > model.t_max:
            if frozen is None:
                frozen = eval_ratio(model, scores[: model.t_max])
            out.append(frozen)
        else:
            out.append(eval_ratio(model, scores[:t]))
    return out


def ratio_model_to_dict(model: RatioModel) -> dict:
    return {
        "prior_1": model.prior_1,
        "t_max": model.t_max,
        "fit_config": {
            "l2_lambda": model.fit_config.l2_lambda,
            "max_iters": model.fit_config.max_iters,
            "tolerance": model.fit_config.tolerance,
            "prob_clamp": model.fit_config.prob_clamp,
        },
        "step_models": [
            {"weights": list(m.weights), "intercept": m.intercept}
            for m in model.step_models
        ],
    }


def ratio_model_from_dict(payload: dict) -> RatioModel:
    cfg = FitConfig(**payload["fit_config"])
    models = tuple(
        LogisticModel(weights=tuple(m["weights"]), intercept=float(m["intercept"]))
        for m in payload["step_models"]
    )
    return RatioModel(
        step_models=models,
        prior_1=float(payload["prior_1"]),
        t_max=int(payload["t_max"]),
        fit_config=cfg,
    )

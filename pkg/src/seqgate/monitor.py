"""Streaming accept/reject decisions over one trajectory.

A DecisionRule pairs a statistic source with a threshold. Ratio-style
statistics reject when the value reaches the threshold (inclusive >=);
score-style statistics reject when the value drops strictly below it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .errors import MonitorClosed, SingleClassData
from .kernels import IsotonicModel, apply_isotonic, fit_isotonic
from .ratio import RatioModel, eval_ratio
from .trajectories import CalibrationSet, LabeledTrajectory

REJECT_AT_OR_ABOVE = "reject_if_stat_at_or_above"
REJECT_BELOW = "reject_if_stat_below"

_SCORE_KINDS = {"raw_score", "calibrated_score"}


class RatioStatistic:
    """Estimated density-ratio process from a fitted RatioModel."""

    kind = "estimated_ratio"

    def __init__(self, model: RatioModel):
        self.model = model

    def value(self, prefix) -> float:
        return eval_ratio(self.model, prefix)


class RawScoreStatistic:
    """The verifier score itself, taken at the current step."""

    kind = "raw_score"

    def value(self, prefix) -> float:
        return float(prefix[-1])


class CalibratedScoreStatistic:
    """Current score passed through a fitted isotonic recalibration map."""

    kind = "calibrated_score"

    def __init__(self, model: IsotonicModel):
        self.model = model

    def value(self, prefix) -> float:
        return apply_isotonic(self.model, float(prefix[-1]))


@dataclass(frozen=True)
class DecisionRule:
    statistic: object
    threshold: float
    direction: str

    def __post_init__(self):
        kind = getattr(self.statistic, "kind", None)
        expected = REJECT_BELOW if kind in _SCORE_KINDS else REJECT_AT_OR_ABOVE
        if self.direction != expected:
            raise ValueError(
                f"statistic kind {kind!r} must use direction {expected!r}"
            )

    def fires(self, stat_value: float) -> bool:
        if self.direction == REJECT_AT_OR_ABOVE:
            return stat_value >= self.threshold
        return stat_value < self.threshold


def ratio_rule(model: RatioModel, threshold: float) -> DecisionRule:
    return DecisionRule(RatioStatistic(model), threshold, REJECT_AT_OR_ABOVE)


def raw_score_rule(alpha: float) -> DecisionRule:
    return DecisionRule(RawScoreStatistic(), alpha, REJECT_BELOW)


def calibrated_score_rule(model: IsotonicModel, alpha: float) -> DecisionRule:
    return DecisionRule(CalibratedScoreStatistic(model), alpha, REJECT_BELOW)


def pooled_isotonic(cal: CalibrationSet) -> IsotonicModel:
    """Isotonic recalibration map fit on the pooled (score, label) pairs of
    every step of every trajectory."""
    xs, ys = [], []
    for item in cal:
        for s in item.scores:
            xs.append(s)
            ys.append(item.label)
    if len(set(ys)) < 2:
        raise SingleClassData("calibrated rule needs both labels present")
    return fit_isotonic(xs, ys)


def make_calibrated_rule(cal: CalibrationSet, alpha: float) -> DecisionRule:
    return calibrated_score_rule(pooled_isotonic(cal), alpha)


@dataclass(frozen=True)
class Status:
    decision: str  # "active" | "rejected" | "accepted"
    step: Optional[int] = None

    @property
    def terminal(self) -> bool:
        return self.decision != "active"


ACTIVE = Status("active")


class MonitorState:
    """Single-owner mutable state for one monitored trajectory."""

    def __init__(self, rule: DecisionRule):
        self.rule = rule
        self.step = 0
        self.observed: list = []
        self.status = ACTIVE

    def observe(self, score: float) -> Status:
        if self.status.terminal:
            raise MonitorClosed(f"monitor already {self.status.decision}")
        self.observed.append(float(score))
        self.step += 1
        if self.rule.fires(self.rule.statistic.value(self.observed)):
            self.status = Status("rejected", self.step)
        return self.status

    def finalize(self) -> Status:
        if not self.status.terminal:
            self.status = Status("accepted", self.step)
        return self.status


def run_offline(rule: DecisionRule, traj: LabeledTrajectory):
    """Batch replay: observe every score in order, then finalize.

    Returns (terminal status, first rejection step or None).
    """
    state = MonitorState(rule)
    for score in traj.scores:
        if state.observe(score).terminal:
            break
    status = state.finalize()
    return status, status.step if status.decision == "rejected" else None

"""Core data types: score sequences, labeled trajectories, calibration sets,
and the seeded stratified splits every downstream stage consumes.

Label convention: 1 marks a successful trajectory (the null hypothesis of
monitoring), 0 an unsuccessful one (the alternative).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import DegenerateSplit, InvalidTrajectory, OutOfRange

DEFAULT_DRE_FRACTION = 0.5


@dataclass(frozen=True)
class ScoreSequence:
    """Ordered per-step verifier scores of one trajectory."""

    scores: tuple

    def __init__(self, scores: Sequence[float]):
        object.__setattr__(self, "scores", tuple(float(s) for s in scores))

    def __len__(self) -> int:
        return len(self.scores)

    def __iter__(self):
        return iter(self.scores)


@dataclass(frozen=True)
class LabeledTrajectory:
    """A score sequence plus its trajectory-level outcome label.

    ``tokens``, when present, holds cumulative token counts after each step
    (same length as scores, non-decreasing).
    """

    id: str
    sequence: ScoreSequence
    label: int
    tokens: Optional[tuple] = None

    def __init__(self, id, scores, label, tokens=None):
        object.__setattr__(self, "id", str(id))
        seq = scores if isinstance(scores, ScoreSequence) else ScoreSequence(scores)
        object.__setattr__(self, "sequence", seq)
        object.__setattr__(self, "label", label)
        object.__setattr__(
            self, "tokens", None if tokens is None else tuple(tokens)
        )

    @property
    def scores(self) -> tuple:
        return self.sequence.scores

    def __len__(self) -> int:
        return len(self.sequence)


@dataclass(frozen=True)
class CalibrationSet:
    """An ordered collection of labeled trajectories."""

    items: tuple

    def __init__(self, items: Sequence[LabeledTrajectory]):
        object.__setattr__(self, "items", tuple(items))

    def __len__(self) -> int:
        return len(self.items)

    def __iter__(self):
        return iter(self.items)

    def labels(self) -> list:
        return [item.label for item in self.items]


@dataclass(frozen=True)
class SplitConfig:
    """Fraction of items routed to the first (ratio-fitting) side, plus seed."""

    dre_fraction: float = DEFAULT_DRE_FRACTION
    seed: int = 0

    def __post_init__(self):
        if not (0.0 < self.dre_fraction < 1.0):
            raise OutOfRange(
                f"dre_fraction must lie strictly in (0, 1), got {self.dre_fraction}"
            )


def validate(raw: LabeledTrajectory, line: Optional[int] = None) -> LabeledTrajectory:
    """Check all trajectory invariants, returning the input unchanged.

    Raises InvalidTrajectory naming the offending trajectory and field.
    """
    scores = raw.sequence.scores
    if len(scores) == 0:
        raise InvalidTrajectory(
            "empty score sequence", trajectory_id=raw.id, field="scores", line=line
        )
    for s in scores:
        if not math.isfinite(s):
            raise InvalidTrajectory(
                f"non-finite score {s!r}", trajectory_id=raw.id, field="scores", line=line
            )
    if raw.label not in (0, 1):
        raise InvalidTrajectory(
            f"label must be 0 or 1, got {raw.label!r}",
            trajectory_id=raw.id, field="label", line=line,
        )
    if raw.tokens is not None:
        if len(raw.tokens) != len(scores):
            raise InvalidTrajectory(
                f"tokens length {len(raw.tokens)} != scores length {len(scores)}",
                trajectory_id=raw.id, field="tokens", line=line,
            )
        prev = 0
        for tok in raw.tokens:
            if not isinstance(tok, int) or isinstance(tok, bool) or tok < 0:
                raise InvalidTrajectory(
                    f"token counts must be non-negative integers, got {tok!r}",
                    trajectory_id=raw.id, field="tokens", line=line,
                )
            if tok < prev:
                raise InvalidTrajectory(
                    "token counts must be non-decreasing",
                    trajectory_id=raw.id, field="tokens", line=line,
                )
            prev = tok
    return raw


def prefix(seq: ScoreSequence, t: int) -> ScoreSequence:
    """First ``t`` scores of the sequence, order preserved."""
    if not (1 <= t <= len(seq)):
        raise OutOfRange(f"prefix length t={t} out of range [1, {len(seq)}]")
    return ScoreSequence(seq.scores[:t])


def _per_label_take(counts: dict, k: int) -> dict:
    """Allocate the first-side quota across labels, keeping at least one item
    of each label on both sides (required by every downstream fitting stage)."""
    n1, n0 = counts.get(1, 0), counts.get(0, 0)
    n = n1 + n0
    if n1 < 2 or n0 < 2 or k < 2 or k > n - 2:
        raise DegenerateSplit(
            f"cannot place both labels on both sides: n1={n1}, n0={n0}, "
            f"first-side size {k} of {n}"
        )
    frac = k / n
    k1 = min(max(int(math.floor(frac * n1 + 0.5)), 1), n1 - 1)
    k0 = min(max(k - k1, 1), n0 - 1)
    k1 = k - k0
    if not (1 <= k1 <= n1 - 1):
        raise DegenerateSplit(
            f"cannot place both labels on both sides: n1={n1}, n0={n0}, "
            f"first-side size {k} of {n}"
        )
    return {1: k1, 0: k0}


def split_calibration(cal: CalibrationSet, cfg: SplitConfig):
    """Seeded stratified partition of ``cal`` into two disjoint sets.

    The first side holds round(dre_fraction * n) items; both sides keep at
    least one trajectory of each label, else DegenerateSplit is raised.
    """
    n = len(cal)
    if n == 0:
        raise DegenerateSplit("cannot split an empty calibration set")
    k = int(math.floor(cfg.dre_fraction * n + 0.5))
    counts = {1: 0, 0: 0}
    for item in cal:
        if item.label not in counts:
            raise InvalidTrajectory(
                f"label must be 0 or 1, got {item.label!r}",
                trajectory_id=item.id, field="label",
            )
        counts[item.label] += 1
    take = _per_label_take(counts, k)

    rng = np.random.default_rng(cfg.seed)
    first_idx = []
    for label in (1, 0):
        idx = [i for i, item in enumerate(cal.items) if item.label == label]
        order = rng.permutation(len(idx))
        first_idx.extend(idx[j] for j in order[: take[label]])
    chosen = set(first_idx)
    first = [item for i, item in enumerate(cal.items) if i in chosen]
    second = [item for i, item in enumerate(cal.items) if i not in chosen]
    return CalibrationSet(first), CalibrationSet(second)

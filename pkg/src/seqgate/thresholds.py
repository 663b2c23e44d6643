"""Decision thresholds for the monitored statistic.

Three kinds: the universal 1/alpha threshold valid for any e-process, a
calibrated order-statistic threshold with a PAC-style guarantee, and the
Bonferroni baseline T/alpha.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import InsufficientCalibration, NoNullTrajectories, OutOfRange
from .kernels import binomial_sf
from .ratio import RatioModel, eval_process
from .trajectories import CalibrationSet

DEFAULT_DELTA = 0.05


@dataclass(frozen=True)
class ThresholdSpec:
    """A resolved decision threshold plus how it was derived."""

    kind: str  # "ville" | "pac" | "bonferroni"
    alpha: float
    value: float
    delta: Optional[float] = None   # pac only
    n_null: Optional[int] = None    # pac only
    k_index: Optional[int] = None   # pac only
    t_cal_max: Optional[int] = None  # bonferroni only


def _check_alpha(alpha: float):
    if not (0.0 < alpha < 1.0):
        raise OutOfRange(f"alpha must lie strictly in (0, 1), got {alpha}")


def ville_threshold(alpha: float) -> ThresholdSpec:
    """Universal threshold 1/alpha."""
    _check_alpha(alpha)
    return ThresholdSpec(kind="ville", alpha=alpha, value=1.0 / alpha)


def bonferroni_threshold(alpha: float, t_cal_max: int) -> ThresholdSpec:
    """Per-step rejection at level alpha/T, i.e. statistic threshold T/alpha."""
    _check_alpha(alpha)
    if t_cal_max < 1:
        raise OutOfRange(f"t_cal_max must be a positive integer, got {t_cal_max}")
    return ThresholdSpec(
        kind="bonferroni", alpha=alpha, value=t_cal_max / alpha, t_cal_max=t_cal_max
    )


def null_maxima(model: RatioModel, thresh_set: CalibrationSet) -> list:
    """Trajectory-wise maximum of the estimated ratio process, nulls only."""
    maxima = [
        max(eval_process(model, item.sequence))
        for item in thresh_set
        if item.label == 1
    ]
    if not maxima:
        raise NoNullTrajectories("threshold calibration needs label-1 trajectories")
    return maxima


def min_null_samples(alpha: float, delta: float) -> int:
    """Smallest n for which Pr[Bin(n, 1-alpha) >= n] <= delta is satisfiable."""
    return math.ceil(math.log(delta) / math.log1p(-alpha))


def pac_index(n: int, alpha: float, delta: float) -> int:
    """Smallest i in 1..n with Pr[Bin(n, 1-alpha) >= i] <= delta."""
    _check_alpha(alpha)
    if not (0.0 < delta < 1.0):
        raise OutOfRange(f"delta must lie strictly in (0, 1), got {delta}")
    if n < 1:
        raise OutOfRange(f"n must be a positive integer, got {n}")
    p = 1.0 - alpha
    if binomial_sf(n, p, n) > delta:
        raise InsufficientCalibration(n, alpha, delta, min_null_samples(alpha, delta))
    # binomial_sf is non-increasing in k, so binary-search the crossing
    lo, hi = 1, n
    while lo < hi:
        mid = (lo + hi) // 2
        if binomial_sf(n, p, mid) <= delta:
            hi = mid
        else:
            lo = mid + 1
    return lo


def pac_threshold(maxima, alpha: float, delta: float, seed: int = 0) -> ThresholdSpec:
    """Order-statistic threshold M_(k); ties are ordered by a seeded fair coin."""
    if len(maxima) == 0:
        raise OutOfRange("maxima must be non-empty")
    n = len(maxima)
    k = pac_index(n, alpha, delta)
    values = np.asarray(maxima, dtype=float)
    coin = np.random.default_rng(seed).random(n)
    order = np.lexsort((coin, values))
    return ThresholdSpec(
        kind="pac",
        alpha=alpha,
        value=float(values[order[k - 1]]),
        delta=delta,
        n_null=n,
        k_index=k,
    )


def threshold_to_dict(spec: ThresholdSpec) -> dict:
    return {
        "kind": spec.kind,
        "alpha": spec.alpha,
        "value": spec.value,
        "delta": spec.delta,
        "n_null": spec.n_null,
        "k_index": spec.k_index,
        "t_cal_max": spec.t_cal_max,
    }


def threshold_from_dict(payload: dict) -> ThresholdSpec:
    return ThresholdSpec(
        kind=payload["kind"],
        alpha=float(payload["alpha"]),
        value=float(payload["value"]),
        delta=None if payload.get("delta") is None else float(payload["delta"]),
        n_null=None if payload.get("n_null") is None else int(payload["n_null"]),
        k_index=None if payload.get("k_index") is None else int(payload["k_index"]),
        t_cal_max=None
        if payload.get("t_cal_max") is None
        else int(payload["t_cal_max"]),
    )

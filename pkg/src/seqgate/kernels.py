"""Self-contained numerical primitives.

Three kernels back the rest of the pipeline: L2-regularized logistic
regression (damped Newton with step halving), pool-adjacent-violators
isotonic regression, and exact binomial upper tails in log space. No
external solver is used; tests verify each kernel against an independent
brute-force oracle.
"""

from __future__ import annotations

import math
import operator
from bisect import bisect_right
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    LengthMismatch,
    OutOfRange,
    SingleClassData,
)

DEFAULT_PROB_CLAMP = 1e-6


@dataclass(frozen=True)
class FitConfig:
    """Hyperparameters for the logistic kernel.

    l2_lambda penalizes squared weight norm (the intercept is never
    penalized); prob_clamp bounds predicted probabilities away from 0 and 1
    so downstream ratios stay finite. The default penalty is a light floor:
    informative verifiers induce large true weights, and heavy shrinkage
    biases the estimated ratio process downward at every step.
    """

    l2_lambda: float = 0.02
    max_iters: int = 100
    tolerance: float = 1e-8
    prob_clamp: float = DEFAULT_PROB_CLAMP

    def __post_init__(self):
        if self.l2_lambda < 0:
            raise OutOfRange(f"l2_lambda must be >= 0, got {self.l2_lambda}")
        if self.max_iters < 1:
            raise OutOfRange(f"max_iters must be >= 1, got {self.max_iters}")
        if self.tolerance <= 0:
            raise OutOfRange(f"tolerance must be > 0, got {self.tolerance}")
        if not (0.0 < self.prob_clamp < 0.5):
            raise OutOfRange(
                f"prob_clamp must lie in (0, 0.5), got {self.prob_clamp}"
            )


@dataclass(frozen=True)
class LogisticModel:
    weights: tuple
    intercept: float


@dataclass(frozen=True)
class IsotonicModel:
    """Right-continuous step function: value of the greatest breakpoint <= s."""

    breakpoints: tuple
    values: tuple


def _sigmoid(z):
    # branch on sign so exp never overflows
    z = np.asarray(z, dtype=float)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def logistic_objective(theta, Z, y, l2_lambda):
    """Penalized negative log-likelihood; theta[-1] is the free intercept."""
    z = Z @ theta
    nll = float(np.sum(np.logaddexp(0.0, z) - y * z))
    return nll + l2_lambda * float(np.dot(theta[:-1], theta[:-1]))


def logistic_gradient(theta, Z, y, l2_lambda):
    mu = _sigmoid(Z @ theta)
    grad = Z.T @ (mu - y)
    grad[:-1] += 2.0 * l2_lambda * theta[:-1]
    return grad


def _as_feature_matrix(features):
    dims = {len(f) for f in features}
    if len(dims) != 1:
        raise DimensionMismatch(f"feature vectors have mixed dimensions {sorted(dims)}")
    return np.asarray([[float(v) for v in f] for f in features], dtype=float)


def fit_logistic(features, labels, cfg: FitConfig = FitConfig()) -> LogisticModel:
    """Minimize the L2-penalized logistic loss by damped Newton iterations.

    Stops when the gradient infinity-norm drops to cfg.tolerance or after
    cfg.max_iters Newton steps, whichever comes first.
    """
    if len(features) != len(labels):
        raise DimensionMismatch(
            f"{len(features)} feature vectors vs {len(labels)} labels"
        )
    y = np.asarray([int(v) for v in labels], dtype=float)
    if any(v not in (0.0, 1.0) for v in y):
        raise OutOfRange("labels must be binary 0/1")
    if len(set(y.tolist())) < 2:
        raise SingleClassData("need at least one example of each label")
    X = _as_feature_matrix(features)
    n, d = X.shape
    Z = np.hstack([X, np.ones((n, 1))])
    theta = np.zeros(d + 1)
    obj = logistic_objective(theta, Z, y, cfg.l2_lambda)

    for _ in range(cfg.max_iters):
        grad = logistic_gradient(theta, Z, y, cfg.l2_lambda)
        if float(np.max(np.abs(grad))) <= cfg.tolerance:
            break
        mu = _sigmoid(Z @ theta)
        w = np.maximum(mu * (1.0 - mu), 1e-12)
        hess = Z.T @ (w[:, None] * Z)
        hess[np.arange(d), np.arange(d)] += 2.0 * cfg.l2_lambda
        try:
            step = np.linalg.solve(hess, grad)
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(hess, grad, rcond=None)[0]
        # halve the step until the objective actually decreases
        scale = 1.0
        while scale > 2.0 ** -40:
            cand = theta - scale * step
            cand_obj = logistic_objective(cand, Z, y, cfg.l2_lambda)
            if cand_obj <= obj:
                theta, obj = cand, cand_obj
                break
            scale *= 0.5
        else:
            break
    return LogisticModel(weights=tuple(theta[:-1]), intercept=float(theta[-1]))


def predict_proba(
    model: LogisticModel, x: Sequence[float], prob_clamp: float = DEFAULT_PROB_CLAMP
) -> float:
    """Clamped sigmoid(weights . x + intercept); never returns 0 or 1."""
    if len(x) != len(model.weights):
        raise DimensionMismatch(
            f"input dimension {len(x)} != model dimension {len(model.weights)}"
        )
    z = float(np.dot(model.weights, np.asarray(x, dtype=float)) + model.intercept)
    p = float(_sigmoid(z))
    return min(max(p, prob_clamp), 1.0 - prob_clamp)


def fit_isotonic(xs, ys) -> IsotonicModel:
    """Least-squares non-decreasing fit of ys against xs (PAVA).

    Equal xs are pooled first (a monotone function cannot separate them);
    the fitted blocks collapse to (breakpoint, value) pairs.
    """
    if len(xs) != len(ys):
        raise LengthMismatch(f"{len(xs)} xs vs {len(ys)} ys")
    if len(xs) == 0:
        raise LengthMismatch("need at least one point")
    order = np.argsort(np.asarray(xs, dtype=float), kind="stable")
    x_sorted = [float(xs[i]) for i in order]
    y_sorted = [float(ys[i]) for i in order]

    # pool ties in x
    grp_x, grp_y, grp_w = [], [], []
    for x, y in zip(x_sorted, y_sorted):
        if grp_x and x == grp_x[-1]:
            grp_w[-1] += 1.0
            grp_y[-1] += (y - grp_y[-1]) / grp_w[-1]
        else:
            grp_x.append(x)
            grp_y.append(y)
            grp_w.append(1.0)

    # pool adjacent violators; blocks[i] = [value, weight, first_group_index]
    blocks = []
    for i, (y, w) in enumerate(zip(grp_y, grp_w)):
        blocks.append([y, w, i])
        while len(blocks) > 1 and blocks[-2][0] > blocks[-1][0]:
            v1, w1, i1 = blocks[-2]
            v2, w2, _ = blocks[-1]
            blocks[-2:] = [[(v1 * w1 + v2 * w2) / (w1 + w2), w1 + w2, i1]]

    breakpoints, values = [], []
    for value, _, first in blocks:
        if values and value == values[-1]:
            continue
        breakpoints.append(grp_x[first])
        values.append(value)
    return IsotonicModel(breakpoints=tuple(breakpoints), values=tuple(values))


def apply_isotonic(model: IsotonicModel, s: float) -> float:
    """Step-function evaluation; inputs below the first breakpoint map to the
    first value."""
    idx = bisect_right(model.breakpoints, s) - 1
    return float(model.values[max(idx, 0)])


def binomial_sf(n: int, p: float, k: int) -> float:
    """Exact Pr[Binomial(n, p) >= k] via log-gamma summation.

    Valid for 0 <= k <= n + 1; relative error is a few ulps per term, far
    inside the 1e-10 contract against exact rational arithmetic.
    """
    try:
        n = operator.index(n)
        k = operator.index(k)
    except TypeError as exc:
        raise OutOfRange(f"n and k must be integers, got n={n!r}, k={k!r}") from exc
    if n < 1:
        raise OutOfRange(f"n must be a positive integer, got {n!r}")
    if not (0.0 <= p <= 1.0):
        raise OutOfRange(f"p must lie in [0, 1], got {p}")
    if not (0 <= k <= n + 1):
        raise OutOfRange(f"k must be an integer in [0, {n + 1}], got {k!r}")
    if k == 0:
        return 1.0
    if k == n + 1:
        return 0.0
    if p == 0.0:
        return 0.0
    if p == 1.0:
        return 1.0
    log_p, log_q = math.log(p), math.log1p(-p)
    log_cn = math.lgamma(n + 1)
    terms = [
        log_cn - math.lgamma(i + 1) - math.lgamma(n - i + 1) + i * log_p + (n - i) * log_q
        for i in range(k, n + 1)
    ]
    top = max(terms)
    if top == -math.inf:
        return 0.0
    total = top + math.log(sum(math.exp(t - top) for t in terms))
    return min(1.0, math.exp(total))

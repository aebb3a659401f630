"""Per-edge log-partition and mean functions for each weight regime.

For a single edge with combined potential t the weight density is
proportional to exp(-t a) over the regime's support, with normalizer
exp(z1(t)).  mean(t) is the expected weight and mean_deriv(t) its
derivative in t (always the negative weight variance, hence <= 0).

Finite regime, support {0, ..., r-1}:
    z1(t)   = log(sum_a exp(-a t))
    mean(t) = sum_a a exp(-a t) / sum_a exp(-a t)
evaluated through a max-shifted softmax so that both tails are stable;
for t >= 0 this is the direct representation, for t < 0 it coincides with
the flipped one (weights on r-1-a with exponent +a t).

Infinite regime, support {0, 1, 2, ...} (t > 0):
    z1(t) = -log(1 - exp(-t)),  mean(t) = 1/(exp(t) - 1)

Continuous regime, support [0, inf) (t > 0):
    z1(t) = -log(t),  mean(t) = 1/t

For the positive regimes z1 returns +inf at t <= 0 (the integral
diverges) while mean/mean_deriv raise, since the mean does not exist
there.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import CONTINUOUS, FINITE, INFINITE, WeightRegime


@dataclass(frozen=True)
class MarginalEval:
    """z1, mean and mean derivative at a single combined potential t."""

    t: float
    z1: float
    mu: float
    mu_prime: float


def _finite_weights(r: int, t: np.ndarray) -> np.ndarray:
    """Softmax weights w_a proportional to exp(-a t), shape t.shape + (r,)."""
    a = np.arange(r, dtype=np.float64)
    x = -t[..., None] * a
    x -= x.max(axis=-1, keepdims=True)
    w = np.exp(x)
    w /= w.sum(axis=-1, keepdims=True)
    return w


def z1(regime: WeightRegime, t: np.ndarray | float) -> np.ndarray | float:
    """Log-normalizer of the single-edge weight law at combined potential t.

    Finite: defined on all of R.  Positive regimes: finite for t > 0 and
    +inf for t <= 0 (the raw normalizing sum/integral diverges).
    """
    tt = np.asarray(t, dtype=np.float64)
    scalar = tt.ndim == 0
    tt = np.atleast_1d(tt)
    if not np.all(np.isfinite(tt)):
        raise ValueError("t must be finite")
    if regime.kind == FINITE:
        a = np.arange(regime.r, dtype=np.float64)
        x = -tt[..., None] * a
        m = x.max(axis=-1)
        out = m + np.log(np.exp(x - m[..., None]).sum(axis=-1))
    else:
        out = np.full(tt.shape, np.inf)
        pos = tt > 0
        if regime.kind == CONTINUOUS:
            out[pos] = -np.log(tt[pos])
        else:
            out[pos] = -np.log(-np.expm1(-tt[pos]))
    return float(out[0]) if scalar else out


def _check_positive_domain(regime: WeightRegime, tt: np.ndarray) -> None:
    if np.any(tt <= 0):
        bad = float(tt[tt <= 0].flat[0])
        raise ValueError(
            f"mean function of the {regime.kind} regime needs t > 0, got t={bad!r}"
        )


def mean(regime: WeightRegime, t: np.ndarray | float) -> np.ndarray | float:
    """Expected edge weight at combined potential t.

    Strictly decreasing on its domain.  Ranges: (0, r-1) for finite
    (with mean(0) = (r-1)/2), (0, inf) for both positive regimes.
    """
    tt = np.asarray(t, dtype=np.float64)
    scalar = tt.ndim == 0
    tt = np.atleast_1d(tt)
    if not np.all(np.isfinite(tt)):
        raise ValueError("t must be finite")
    if regime.kind == FINITE:
        w = _finite_weights(regime.r, tt)
        a = np.arange(regime.r, dtype=np.float64)
        out = (w * a).sum(axis=-1)
    elif regime.kind == CONTINUOUS:
        _check_positive_domain(regime, tt)
        out = 1.0 / tt
    else:
        _check_positive_domain(regime, tt)
        # 1/(e^t - 1) written to avoid overflow at large t and cancellation
        # at small t: exp(-t) / (1 - exp(-t)).
        out = np.exp(-tt) / (-np.expm1(-tt))
    return float(out[0]) if scalar else out


def mean_deriv(regime: WeightRegime, t: np.ndarray | float) -> np.ndarray | float:
    """d mean / d t; equals minus the weight variance, so always < 0."""
    tt = np.asarray(t, dtype=np.float64)
    scalar = tt.ndim == 0
    tt = np.atleast_1d(tt)
    if not np.all(np.isfinite(tt)):
        raise ValueError("t must be finite")
    if regime.kind == FINITE:
        w = _finite_weights(regime.r, tt)
        a = np.arange(regime.r, dtype=np.float64)
        mu = (w * a).sum(axis=-1)
        out = -(w * (a - mu[..., None]) ** 2).sum(axis=-1)
    elif regime.kind == CONTINUOUS:
        _check_positive_domain(regime, tt)
        out = -1.0 / (tt * tt)
    else:
        _check_positive_domain(regime, tt)
        # -e^t/(e^t-1)^2 = -e^{-t}/(1-e^{-t})^2
        e = np.exp(-tt)
        out = -e / np.expm1(-tt) ** 2
    return float(out[0]) if scalar else out


def evaluate(regime: WeightRegime, t: float) -> MarginalEval:
    """Bundle z1, mean and mean_deriv at one point (raises off-domain)."""
    return MarginalEval(
        t=float(t),
        z1=float(z1(regime, t)),
        mu=float(mean(regime, t)),
        mu_prime=float(mean_deriv(regime, t)),
    )


_INV_STEP_TOL = 1e-13
_INV_RESID_TOL = 4e-16


def mean_inverse(regime: WeightRegime, m: float) -> float:
    """The unique t with mean(regime, t) == m.

    m must lie in the open range of the mean function.  Closed forms for
    the positive regimes; for the finite regime a bracketing search plus
    safeguarded Newton polish, accurate to a relative 1e-13 in t.
    """
    m = float(m)
    if not np.isfinite(m):
        raise ValueError("m must be finite")
    if regime.kind == CONTINUOUS:
        if m <= 0:
            raise ValueError("continuous regime mean range is (0, inf)")
        return 1.0 / m
    if regime.kind == INFINITE:
        if m <= 0:
            raise ValueError("infinite regime mean range is (0, inf)")
        return float(np.log1p(1.0 / m))

    r = regime.r
    if not 0 < m < r - 1:
        raise ValueError(f"finite regime mean range is (0, {r - 1})")

    # Bracket the root of mean(t) - m (decreasing in t).
    lo, hi = -1.0, 1.0
    while mean(regime, hi) > m:
        hi *= 2.0
    while mean(regime, lo) < m:
        lo *= 2.0
    # lo has mean >= m >= mean at hi; root in [lo, hi].
    t = 0.5 * (lo + hi)
    resid_tol = _INV_RESID_TOL * max(1.0, m)
    for _ in range(200):
        mu = float(mean(regime, t))
        if abs(mu - m) <= resid_tol:
            return t
        if mu > m:
            lo = t
        else:
            hi = t
        dmu = float(mean_deriv(regime, t))
        t_new = t - (mu - m) / dmu if dmu != 0.0 else t
        if not lo < t_new < hi:
            t_new = 0.5 * (lo + hi)
        # A tiny accepted step bounds the root error directly (Newton is
        # quadratic here and the bisection fallback has a collapsed bracket),
        # unlike the mean-space residual, whose scale dilates by 1/mean'.
        if abs(t_new - t) <= _INV_STEP_TOL * (1.0 + abs(t_new)):
            return t_new
        t = t_new
    return t

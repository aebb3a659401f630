"""Maximum-likelihood vertex potentials for a target degree sequence.

Two solvers.  The finite regime uses the log-space fixed-point map

    phi_i(x) = x_i + (log sum_{j != i} mean(x_i + x_j) - log d_i) / (r - 1)

whose fixed points are exactly the MLEs; on the interior of the degree
polytope the iteration contracts geometrically over pairs of steps.  The
positive regimes (unbounded integer / continuous weights) use damped
Newton ascent on the concave log-likelihood, with every accepted iterate
kept inside the parameter domain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    FINITE,
    DegreeSequence,
    FitReport,
    NoMleError,
    RegimeError,
    WeightRegime,
    validate_potentials,
)
from .graphical import in_mean_interior
from .meanfn import mean, mean_deriv, mean_inverse, z1
from .sampler import _mean_row_sums


@dataclass(frozen=True)
class SolverOptions:
    """Knobs shared by both solvers.

    theta0 overrides the default start (zeros for the finite fixed point,
    a symmetric interior point for Newton).  record_trace additionally
    stores per-iteration steps, residuals and the full iterate history in
    the report; it costs one extra expected-degree evaluation per step.
    """

    tol: float = 1e-10
    max_iter: int = 5000
    divergence_norm: float = 50.0
    theta0: np.ndarray | None = None
    record_trace: bool = False

    def __post_init__(self) -> None:
        if not (self.tol > 0.0 and math.isfinite(self.tol)):
            raise ValueError("tol must be a positive finite float")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if not (self.divergence_norm > 0.0):
            raise ValueError("divergence_norm must be positive")


@dataclass(frozen=True)
class ContractionInfo:
    """Certified contraction data for the finite-regime fixed point.

    Over any ball where iterates and the fixed point stay within max-norm
    K of each other (K = 2*||theta_hat||_inf + ||theta_0||_inf suffices),
    two steps of the map shrink the distance to the fixed point by at
    least the factor 1 - delta**2 = beta**2.
    """

    r: int
    K: float
    delta: float
    beta: float


def _log_expm1(x: float) -> float:
    """log(exp(x) - 1) for x > 0 without overflow."""
    if x > 1.0:
        return x + math.log1p(-math.exp(-x))
    return math.log(math.expm1(x))


def contraction_delta(r: int, K: float) -> ContractionInfo:
    """Contraction margin delta for the finite regime at ball radius K.

    delta = min{ (e^{2K}-1)/(e^{2rK}-1), -mean'(2K)/mean(-2K) } / (r-1),
    with the K = 0 limits 1/r and (r+1)/6 taken exactly.
    """
    if not isinstance(r, int) or isinstance(r, bool) or r < 2:
        raise ValueError("r must be an integer >= 2")
    K = float(K)
    if not (K >= 0.0 and math.isfinite(K)):
        raise ValueError("K must be a finite float >= 0")
    regime = WeightRegime.finite(r)
    if K == 0.0:
        term1 = 1.0 / r
        term2 = (r + 1) / 6.0
    else:
        term1 = math.exp(_log_expm1(2.0 * K) - _log_expm1(2.0 * r * K))
        term2 = -float(mean_deriv(regime, 2.0 * K)) / float(mean(regime, -2.0 * K))
    delta = min(term1, term2) / (r - 1)
    beta = math.sqrt(1.0 - delta * delta)
    return ContractionInfo(r=r, K=K, delta=delta, beta=beta)


def _as_degrees(d: DegreeSequence | np.ndarray) -> np.ndarray:
    if isinstance(d, DegreeSequence):
        return d.as_float()
    return DegreeSequence(np.asarray(d, dtype=np.float64)).as_float()


def phi_step(d: DegreeSequence | np.ndarray, r: int, x: np.ndarray) -> np.ndarray:
    """One application of the finite-regime fixed-point map to x."""
    dv = _as_degrees(d)
    if np.any(dv <= 0.0):
        raise ValueError("the fixed-point map needs strictly positive targets")
    x = np.asarray(x, dtype=np.float64)
    if x.shape != dv.shape:
        raise ValueError("x and d must have the same length")
    regime = WeightRegime.finite(r)
    rows = _mean_row_sums(regime, x)
    return x + (np.log(rows) - np.log(dv)) / (r - 1)


def _residual_inf(dv: np.ndarray, rows: np.ndarray) -> float:
    return float(np.max(np.abs(dv - rows)))


def fit_finite_discrete(
    d: DegreeSequence | np.ndarray, r: int, opts: SolverOptions | None = None
) -> FitReport:
    """Fixed-point fit for weights in {0, ..., r-1}.

    Stops when the max-norm step drops below opts.tol.  Declares
    divergence when an iterate leaves the divergence_norm ball, turns
    non-finite, or the budget runs out with non-decreasing steps (the
    behaviour off the interior of the degree polytope).
    """
    opts = opts or SolverOptions()
    dv = _as_degrees(d)
    if np.any(dv <= 0.0):
        raise NoMleError("a zero target degree lies outside the open degree polytope")
    regime = WeightRegime.finite(r)
    n = dv.shape[0]
    if opts.theta0 is not None:
        th = np.asarray(opts.theta0, dtype=np.float64).copy()
        if th.shape != (n,) or not np.all(np.isfinite(th)):
            raise ValueError("theta0 must be a finite vector matching d")
    else:
        th = np.zeros(n)

    steps: list[float] = []
    residuals: list[float] = []
    iterates: list[np.ndarray] = [th.copy()] if opts.record_trace else []

    def report(theta_hat, converged, diverged, k, residual):
        return FitReport(
            theta_hat=theta_hat,
            converged=converged,
            diverged=diverged,
            iterations=k,
            residual_inf=residual,
            step_trace=np.array(steps) if opts.record_trace else None,
            residual_trace=np.array(residuals) if opts.record_trace else None,
            iterates=np.array(iterates) if opts.record_trace else None,
        )

    for k in range(1, opts.max_iter + 1):
        rows = _mean_row_sums(regime, th)
        th_new = th + (np.log(rows) - np.log(dv)) / (r - 1)
        if not np.all(np.isfinite(th_new)):
            return report(None, False, True, k, float("inf"))
        step = float(np.max(np.abs(th_new - th)))
        steps.append(step)
        th = th_new
        if opts.record_trace:
            iterates.append(th.copy())
            residuals.append(_residual_inf(dv, _mean_row_sums(regime, th)))
        if float(np.max(np.abs(th))) > opts.divergence_norm:
            return report(None, False, True, k, float("inf"))
        if step < opts.tol:
            res = _residual_inf(dv, _mean_row_sums(regime, th))
            return report(th, True, False, k, res)
    # Budget exhausted.  Convergent runs shrink steps geometrically, so
    # k * step_k -> 0; off the open polytope the iterates drift away with
    # harmonic-like steps and k * step_k stays level.  Compare the
    # index-weighted steps across a 10-iteration window (plain steps for
    # very short budgets) to tell the two apart.
    k = len(steps)
    if k >= 11:
        escaping = steps[-1] * k >= 0.999 * steps[-11] * (k - 10)
    else:
        escaping = steps[-1] >= 0.999 * steps[0]
    if escaping:
        return report(None, False, True, opts.max_iter, float("inf"))
    res = _residual_inf(dv, _mean_row_sums(regime, th))
    return report(th, False, False, opts.max_iter, res)


def hessian_logpartition(regime: WeightRegime, theta: np.ndarray) -> np.ndarray:
    """Hessian of the graph log-partition function at theta.

    Off-diagonal (i, j): -mean'(theta_i + theta_j) > 0; diagonal entries
    are the row sums of the off-diagonal part, so the matrix is
    diagonally balanced and positive definite for n >= 3.
    """
    th = np.asarray(theta, dtype=np.float64)
    if not validate_potentials(regime, th):
        raise ValueError("potentials outside the regime's parameter domain")
    n = th.shape[0]
    t = th[:, None] + th[None, :]
    idx = np.arange(n)
    t[idx, idx] = 1.0
    h = -mean_deriv(regime, t)
    h[idx, idx] = 0.0
    h[idx, idx] = h.sum(axis=1)
    return h


def inverse_norm_bound(n: int, ell: float) -> float:
    """Max-norm bound on the inverse of a symmetric diagonally balanced
    matrix with off-diagonal entries >= ell > 0, for n >= 3:
    (3n - 4) / (2 ell (n - 2)(n - 1))."""
    if not isinstance(n, int) or isinstance(n, bool) or n < 3:
        raise ValueError("n must be an integer >= 3")
    ell = float(ell)
    if not (ell > 0.0 and math.isfinite(ell)):
        raise ValueError("ell must be a positive finite float")
    return (3.0 * n - 4.0) / (2.0 * ell * (n - 2.0) * (n - 1.0))


def _pairwise_z1_sum(regime: WeightRegime, th: np.ndarray) -> float:
    n = th.shape[0]
    total = 0.0
    block = max(1, (1 << 22) // max(n, 1))
    for start in range(0, n, block):
        stop = min(start + block, n)
        t = th[start:stop, None] + th[None, :]
        local = np.arange(stop - start)
        t[local, np.arange(start, stop)] = 1.0
        z = np.asarray(z1(regime, t))
        z[local, np.arange(start, stop)] = 0.0
        # Keep only j > i within the full matrix.
        cols = np.arange(n)[None, :]
        rows_global = np.arange(start, stop)[:, None]
        z[cols <= rows_global] = 0.0
        total += float(z.sum())
    return total


def _loglik(regime: WeightRegime, th: np.ndarray, dv: np.ndarray) -> float:
    return -float(th @ dv) - _pairwise_z1_sum(regime, th)


def fit_positive_regime(
    regime: WeightRegime, d: DegreeSequence | np.ndarray, opts: SolverOptions | None = None
) -> FitReport:
    """Damped Newton fit for the unbounded-weight regimes.

    Raises NoMleError when d is outside the open region where an MLE
    exists (some d_i <= 0 or max d_i >= half the total).  Convergence is
    declared on the degree residual: ||d - expected||_inf <= tol * max(1, ||d||_inf).
    """
    if regime.kind == FINITE:
        raise RegimeError("use fit_finite_discrete for the finite regime")
    opts = opts or SolverOptions()
    dv = _as_degrees(d)
    dseq = DegreeSequence(dv)
    if not in_mean_interior(regime, dseq):
        raise NoMleError(
            "target degrees outside the open region (need all d_i > 0 and "
            "max d_i < sum(d)/2): no maximum-likelihood potentials exist"
        )
    n = dv.shape[0]
    if opts.theta0 is not None:
        th = np.asarray(opts.theta0, dtype=np.float64).copy()
        if th.shape != (n,) or not validate_potentials(regime, th):
            raise ValueError("theta0 must lie in the regime's parameter domain")
    else:
        t0 = mean_inverse(regime, float(dv.mean()) / (n - 1))
        th = np.full(n, 0.5 * t0)

    tol_abs = opts.tol * max(1.0, float(np.max(np.abs(dv))))
    steps: list[float] = []
    residuals: list[float] = []
    iterates: list[np.ndarray] = [th.copy()] if opts.record_trace else []

    def report(theta_hat, converged, k, residual):
        return FitReport(
            theta_hat=theta_hat,
            converged=converged,
            diverged=False,
            iterations=k,
            residual_inf=residual,
            step_trace=np.array(steps) if opts.record_trace else None,
            residual_trace=np.array(residuals) if opts.record_trace else None,
            iterates=np.array(iterates) if opts.record_trace else None,
        )

    f_cur = _loglik(regime, th, dv)
    for k in range(opts.max_iter + 1):
        rows = _mean_row_sums(regime, th)
        res = _residual_inf(dv, rows)
        if opts.record_trace and k > 0:
            residuals.append(res)
        if res <= tol_abs:
            return report(th, True, k, res)
        if k == opts.max_iter:
            return report(th, False, k, res)
        h = hessian_logpartition(regime, th)
        h[np.arange(n), np.arange(n)] += 1e-12
        try:
            direction = np.linalg.solve(h, rows - dv)
        except np.linalg.LinAlgError:
            return report(th, False, k, res)
        # Ascent test with a float-noise allowance: near the optimum a
        # genuine Newton step improves F by less than the rounding error
        # of evaluating F itself, and a strict test would stall the
        # iteration just above the residual tolerance.
        f_slack = 1e-12 * (1.0 + abs(f_cur))
        alpha = 1.0
        accepted = False
        for _ in range(60):
            cand = th + alpha * direction
            if validate_potentials(regime, cand):
                f_cand = _loglik(regime, cand, dv)
                if f_cand >= f_cur - f_slack:
                    steps.append(float(np.max(np.abs(cand - th))))
                    th = cand
                    f_cur = f_cand
                    accepted = True
                    break
            alpha *= 0.5
        if not accepted:
            return report(th, False, k, res)
        if opts.record_trace:
            iterates.append(th.copy())
    raise AssertionError("unreachable: the loop always returns")


def fit(
    regime: WeightRegime, d: DegreeSequence | np.ndarray, opts: SolverOptions | None = None
) -> FitReport:
    """Dispatch to the regime's solver."""
    if regime.kind == FINITE:
        return fit_finite_discrete(d, regime.r, opts)
    return fit_positive_regime(regime, d, opts)


def contraction_for_fit(
    r: int, report: FitReport, theta0: np.ndarray | None = None
) -> ContractionInfo:
    """ContractionInfo at the ball radius implied by a converged fit:
    K = 2*||theta_hat||_inf + ||theta0||_inf (theta0 defaults to zero)."""
    if report.theta_hat is None:
        raise ValueError("fit produced no potentials")
    k = 2.0 * float(np.max(np.abs(report.theta_hat)))
    if theta0 is not None:
        k += float(np.max(np.abs(np.asarray(theta0, dtype=np.float64))))
    return contraction_delta(r, k)

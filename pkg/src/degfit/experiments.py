"""Seeded end-to-end experiments: convergence traces, consistency sweeps,
and true-vs-fitted scatter runs, with delimited-text writers.

Every replicate gets its own PRNG substream derived from (n, replicate,
purpose) by a splitmix-style integer hash, so results are reproducible
bit-for-bit from the seed alone and independent of execution order.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from typing import Any

import numpy as np

from .core import (
    FINITE,
    DegreeSequence,
    NoMleError,
    WeightRegime,
    format_float,
)
from .mle import ContractionInfo, SolverOptions, contraction_for_fit, fit
from .sampler import SeededRng, sample_graph


# -- potential laws -----------------------------------------------------------


@dataclass(frozen=True)
class UniformBox:
    """theta_i independent uniform on [lo, hi]."""

    lo: float
    hi: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.lo) and math.isfinite(self.hi) and self.lo < self.hi):
            raise ValueError("need finite lo < hi")


@dataclass(frozen=True)
class SymmetricShifted:
    """theta_i = base + uniform jitter on [-jitter, jitter], base > jitter >= 0.

    Guarantees every pairwise sum is at least 2*(base - jitter) > 0, so the
    law is safe for the regimes that need positive pairwise sums.
    """

    base: float
    jitter: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.base) and math.isfinite(self.jitter)):
            raise ValueError("base and jitter must be finite")
        if not 0.0 <= self.jitter < self.base:
            raise ValueError("need base > jitter >= 0")


ThetaLaw = UniformBox | SymmetricShifted


def draw_theta(law: ThetaLaw, n: int, rng: SeededRng) -> np.ndarray:
    gen = rng.generator()
    u = (gen.integers(0, 1 << 53, size=n).astype(np.float64) + 0.5) / float(1 << 53)
    if isinstance(law, UniformBox):
        return law.lo + (law.hi - law.lo) * u
    return law.base + law.jitter * (2.0 * u - 1.0)


def theta_law_from_json(d: Any) -> ThetaLaw:
    if not isinstance(d, dict) or "kind" not in d:
        raise ValueError("theta_law must be an object with a 'kind' field")
    kind = d["kind"]
    if kind == "uniform":
        return UniformBox(lo=float(d["lo"]), hi=float(d["hi"]))
    if kind == "symmetric":
        return SymmetricShifted(base=float(d["base"]), jitter=float(d["jitter"]))
    raise ValueError(f"unknown theta_law kind {kind!r}")


def theta_law_to_json(law: ThetaLaw) -> dict[str, Any]:
    if isinstance(law, UniformBox):
        return {"kind": "uniform", "lo": law.lo, "hi": law.hi}
    return {"kind": "symmetric", "base": law.base, "jitter": law.jitter}


# -- substreams ---------------------------------------------------------------

_MASK64 = (1 << 64) - 1

STREAM_THETA = 1
STREAM_GRAPH = 2


def _mix64(z: int) -> int:
    z = (z + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


def substream_id(*parts: int) -> int:
    """Deterministic 64-bit id for a tuple of non-negative integers."""
    h = 0
    for p in parts:
        h = _mix64(h ^ (int(p) & _MASK64))
    return h


# -- configuration ------------------------------------------------------------


@dataclass(frozen=True)
class ExperimentConfig:
    """Shared recipe for the seeded experiments.

    n_values carries one entry for trace/scatter runs and the full sweep
    for consistency runs.  Positive regimes require a SymmetricShifted
    law so pairwise potential sums stay bounded away from zero.
    """

    regime: WeightRegime
    n_values: tuple[int, ...]
    replicates: int
    theta_law: ThetaLaw
    seed: int
    solver: SolverOptions = field(default_factory=SolverOptions)

    def __post_init__(self) -> None:
        if not self.n_values or any(n < 3 for n in self.n_values):
            raise ValueError("n_values must be non-empty with every n >= 3")
        if list(self.n_values) != sorted(set(self.n_values)):
            raise ValueError("n_values must be strictly increasing")
        if self.replicates < 1:
            raise ValueError("replicates must be >= 1")
        if self.regime.kind != FINITE and not isinstance(self.theta_law, SymmetricShifted):
            raise ValueError(
                "positive regimes need a SymmetricShifted law (pairwise sums "
                "must stay bounded away from zero)"
            )


def config_from_json(d: Any) -> ExperimentConfig:
    """Parse a config object.

    Accepts either "n" (single size) or "n_values" (sweep); "replicates"
    defaults to 1; "solver" is optional.
    """
    if not isinstance(d, dict):
        raise ValueError("experiment config must be a JSON object")
    unknown = set(d) - {"regime", "theta_law", "seed", "n", "n_values", "replicates", "solver"}
    if unknown:
        raise ValueError(f"unknown config fields {sorted(unknown)}")
    regime = WeightRegime.from_json_dict(d.get("regime"))
    law = theta_law_from_json(d.get("theta_law"))
    if "seed" not in d or not isinstance(d["seed"], int) or isinstance(d["seed"], bool):
        raise ValueError("config needs an integer 'seed'")
    if ("n" in d) == ("n_values" in d):
        raise ValueError("config needs exactly one of 'n' or 'n_values'")
    if "n" in d:
        n_values = (int(d["n"]),)
    else:
        n_values = tuple(int(x) for x in d["n_values"])
    replicates = int(d.get("replicates", 1))
    solver = SolverOptions()
    if "solver" in d:
        s = d["solver"]
        if not isinstance(s, dict):
            raise ValueError("'solver' must be an object")
        allowed = {"tol", "max_iter", "divergence_norm"}
        bad = set(s) - allowed
        if bad:
            raise ValueError(f"unknown solver fields {sorted(bad)}")
        solver = SolverOptions(
            tol=float(s.get("tol", solver.tol)),
            max_iter=int(s.get("max_iter", solver.max_iter)),
            divergence_norm=float(s.get("divergence_norm", solver.divergence_norm)),
        )
    return ExperimentConfig(
        regime=regime,
        n_values=n_values,
        replicates=replicates,
        theta_law=law,
        seed=d["seed"],
        solver=solver,
    )


# -- convergence trace --------------------------------------------------------


@dataclass(frozen=True)
class TraceRow:
    iteration: int
    step_inf: float
    dist_inf: float


@dataclass(frozen=True)
class TraceResult:
    """Distance-to-final-iterate curve for one seeded fit."""

    regime: WeightRegime
    n: int
    seed: int
    existed: bool
    converged: bool
    iterations: int
    rows: tuple[TraceRow, ...]
    contraction: ContractionInfo | None
    diagnosis: str


def _replicate_draw(
    config: ExperimentConfig, n: int, replicate: int
) -> tuple[np.ndarray, DegreeSequence]:
    theta = draw_theta(
        config.theta_law, n, SeededRng(config.seed, substream_id(n, replicate, STREAM_THETA))
    )
    g = sample_graph(
        config.regime, theta, SeededRng(config.seed, substream_id(n, replicate, STREAM_GRAPH))
    )
    return theta, g.degree_sequence()


def run_convergence_trace(config: ExperimentConfig) -> TraceResult:
    """Fit one sampled degree sequence, recording each iterate's distance
    to the final one (the last point, at distance zero, is omitted)."""
    n = config.n_values[0]
    _, d = _replicate_draw(config, n, 0)
    opts = replace(config.solver, record_trace=True)
    try:
        rep = fit(config.regime, d, opts)
    except NoMleError as exc:
        return TraceResult(
            regime=config.regime,
            n=n,
            seed=config.seed,
            existed=False,
            converged=False,
            iterations=0,
            rows=(),
            contraction=None,
            diagnosis=str(exc),
        )
    if rep.diverged or rep.theta_hat is None:
        return TraceResult(
            regime=config.regime,
            n=n,
            seed=config.seed,
            existed=False,
            converged=False,
            iterations=rep.iterations,
            rows=(),
            contraction=None,
            diagnosis="divergent iteration: no potentials fit the targets",
        )
    final = rep.iterates[-1]
    dists = np.max(np.abs(rep.iterates - final), axis=1)
    rows = tuple(
        TraceRow(iteration=k, step_inf=float(rep.step_trace[k]), dist_inf=float(dists[k]))
        for k in range(len(rep.step_trace))
    )
    contraction = None
    if config.regime.kind == FINITE:
        theta0 = config.solver.theta0 if config.solver.theta0 is not None else None
        contraction = contraction_for_fit(config.regime.r, rep, theta0)
    return TraceResult(
        regime=config.regime,
        n=n,
        seed=config.seed,
        existed=True,
        converged=rep.converged,
        iterations=rep.iterations,
        rows=rows,
        contraction=contraction,
        diagnosis="ok" if rep.converged else "iteration budget exhausted",
    )


# -- consistency sweep --------------------------------------------------------


@dataclass(frozen=True)
class ConsistencyRow:
    """One replicate: fit error against the generating potentials."""

    n: int
    replicate: int
    existed: bool
    converged: bool
    iterations: int
    err_inf: float
    err_scaled: float


@dataclass(frozen=True)
class ConsistencyResult:
    config: ExperimentConfig
    rows: tuple[ConsistencyRow, ...]
    summary: dict[str, Any]


def run_consistency_experiment(config: ExperimentConfig) -> ConsistencyResult:
    """Sample-and-refit sweep over n_values x replicates.

    err_inf is ||theta_hat - theta||_inf, err_scaled multiplies it by
    sqrt(n / log n).  Replicates whose degree targets admit no MLE (or
    whose fit fails) get existed=False and NaN errors; that is recorded,
    not fatal.
    """
    rows: list[ConsistencyRow] = []
    for n in config.n_values:
        for rep_idx in range(config.replicates):
            theta, d = _replicate_draw(config, n, rep_idx)
            existed = True
            converged = False
            iterations = 0
            err = float("nan")
            try:
                rep = fit(config.regime, d, config.solver)
                iterations = rep.iterations
                converged = rep.converged
                if rep.converged and rep.theta_hat is not None:
                    err = float(np.max(np.abs(rep.theta_hat - theta)))
                else:
                    existed = False
            except NoMleError:
                existed = False
            scale = math.sqrt(n / math.log(n))
            rows.append(
                ConsistencyRow(
                    n=n,
                    replicate=rep_idx,
                    existed=existed,
                    converged=converged,
                    iterations=iterations,
                    err_inf=err,
                    err_scaled=err * scale,
                )
            )
    per_n: dict[str, Any] = {}
    for n in config.n_values:
        errs = np.array([r.err_inf for r in rows if r.n == n and r.existed])
        scaled = np.array([r.err_scaled for r in rows if r.n == n and r.existed])
        total = sum(1 for r in rows if r.n == n)
        entry: dict[str, Any] = {"fraction_existed": len(errs) / total}
        if len(errs):
            entry.update(
                median_err=float(np.median(errs)),
                q05_err=float(np.quantile(errs, 0.05)),
                q95_err=float(np.quantile(errs, 0.95)),
                median_err_scaled=float(np.median(scaled)),
            )
        per_n[str(n)] = entry
    summary = {
        "kind": "consistency",
        "regime": config.regime.to_json_dict(),
        "theta_law": theta_law_to_json(config.theta_law),
        "seed": config.seed,
        "replicates": config.replicates,
        "per_n": per_n,
    }
    return ConsistencyResult(config=config, rows=tuple(rows), summary=summary)


# -- scatter ------------------------------------------------------------------


@dataclass(frozen=True)
class ScatterResult:
    """Per-vertex true and fitted potentials for one replicate."""

    config: ExperimentConfig
    n: int
    existed: bool
    theta_true: np.ndarray
    theta_hat: np.ndarray | None
    summary: dict[str, Any]


def least_squares_slope(x: np.ndarray, y: np.ndarray) -> float:
    xc = x - x.mean()
    denom = float(xc @ xc)
    if denom == 0.0:
        raise ValueError("slope undefined for constant x")
    return float(xc @ (y - y.mean())) / denom


def run_scatter(config: ExperimentConfig) -> ScatterResult:
    """One sample-and-refit at a single n, keeping the paired potentials."""
    n = config.n_values[0]
    theta, d = _replicate_draw(config, n, 0)
    base = {
        "kind": "scatter",
        "regime": config.regime.to_json_dict(),
        "theta_law": theta_law_to_json(config.theta_law),
        "seed": config.seed,
        "n": n,
    }
    try:
        rep = fit(config.regime, d, config.solver)
    except NoMleError as exc:
        return ScatterResult(
            config=config,
            n=n,
            existed=False,
            theta_true=theta,
            theta_hat=None,
            summary={**base, "existed": False, "diagnosis": str(exc)},
        )
    if not rep.converged or rep.theta_hat is None:
        return ScatterResult(
            config=config,
            n=n,
            existed=False,
            theta_true=theta,
            theta_hat=None,
            summary={**base, "existed": False, "diagnosis": "fit did not converge"},
        )
    err = float(np.max(np.abs(rep.theta_hat - theta)))
    slope = least_squares_slope(theta, rep.theta_hat)
    summary = {
        **base,
        "existed": True,
        "max_abs_err": err,
        "slope": slope,
        "iterations": rep.iterations,
    }
    return ScatterResult(
        config=config,
        n=n,
        existed=True,
        theta_true=theta,
        theta_hat=rep.theta_hat,
        summary=summary,
    )


# -- writers ------------------------------------------------------------------


def _b(x: bool) -> str:
    return "true" if x else "false"


def write_trace_csv(result: TraceResult, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("iteration,step_inf,dist_inf\n")
        for row in result.rows:
            fh.write(
                f"{row.iteration},{format_float(row.step_inf)},{format_float(row.dist_inf)}\n"
            )


def trace_summary(result: TraceResult) -> dict[str, Any]:
    out: dict[str, Any] = {
        "kind": "trace",
        "regime": result.regime.to_json_dict(),
        "n": result.n,
        "seed": result.seed,
        "existed": result.existed,
        "converged": result.converged,
        "iterations": result.iterations,
        "diagnosis": result.diagnosis,
    }
    if result.contraction is not None:
        out["contraction"] = {
            "K": result.contraction.K,
            "delta": result.contraction.delta,
            "beta": result.contraction.beta,
            "two_step_factor": 1.0 - result.contraction.delta**2,
        }
    return out


def write_consistency_csv(result: ConsistencyResult, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("n,replicate,existed,converged,iterations,err_inf,err_scaled\n")
        for r in result.rows:
            fh.write(
                f"{r.n},{r.replicate},{_b(r.existed)},{_b(r.converged)},"
                f"{r.iterations},{format_float(r.err_inf)},{format_float(r.err_scaled)}\n"
            )


def write_scatter_csv(result: ScatterResult, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("vertex,theta_true,theta_hat\n")
        if result.theta_hat is None:
            return
        for i in range(result.n):
            fh.write(
                f"{i},{format_float(result.theta_true[i])},"
                f"{format_float(result.theta_hat[i])}\n"
            )


def write_summary_json(summary: dict[str, Any], path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")

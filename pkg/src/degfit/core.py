"""Domain types for weighted graphs with prescribed degree behaviour.

A weight regime fixes the support of a single edge weight: a finite range
{0, ..., r-1}, the non-negative integers, or the non-negative reals.  The
graph model assigns independent weights to the n(n-1)/2 vertex pairs, and
everything downstream (sampling, fitting, graphicality) is parameterised
by the regime.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any

import numpy as np

FINITE = "finite"
INFINITE = "infinite"
CONTINUOUS = "continuous"

_KINDS = (FINITE, INFINITE, CONTINUOUS)

GRAPH_FORMAT_VERSION = 1


class RegimeError(ValueError):
    """An operation was asked for under a regime it does not support."""


class NoMleError(RuntimeError):
    """The target degree sequence admits no maximum-likelihood potentials."""


@dataclass(frozen=True)
class WeightRegime:
    """Support of a single edge weight.

    kind is one of "finite", "infinite", "continuous"; r is the number of
    weight levels and is present exactly when kind == "finite" (r >= 2,
    weights live in {0, ..., r-1}).
    """

    kind: str
    r: int | None = None

    def __post_init__(self) -> None:
        if self.kind not in _KINDS:
            raise ValueError(f"unknown regime kind {self.kind!r}")
        if self.kind == FINITE:
            if not isinstance(self.r, int) or isinstance(self.r, bool) or self.r < 2:
                raise ValueError("finite regime needs an integer r >= 2")
        elif self.r is not None:
            raise ValueError(f"regime {self.kind!r} takes no r")

    @classmethod
    def finite(cls, r: int) -> WeightRegime:
        return cls(FINITE, r)

    @classmethod
    def infinite(cls) -> WeightRegime:
        return cls(INFINITE)

    @classmethod
    def continuous(cls) -> WeightRegime:
        return cls(CONTINUOUS)

    @property
    def is_discrete(self) -> bool:
        return self.kind != CONTINUOUS

    @property
    def is_positive(self) -> bool:
        """True for the regimes whose potentials need positive pairwise sums."""
        return self.kind != FINITE

    def max_weight(self) -> int | float:
        return self.r - 1 if self.kind == FINITE else float("inf")

    def to_json_dict(self) -> dict[str, Any]:
        d: dict[str, Any] = {"kind": self.kind}
        if self.kind == FINITE:
            d["r"] = self.r
        return d

    @classmethod
    def from_json_dict(cls, d: Any) -> WeightRegime:
        if not isinstance(d, dict) or "kind" not in d:
            raise ValueError("regime must be an object with a 'kind' field")
        kind = d["kind"]
        extra = set(d) - {"kind", "r"}
        if extra:
            raise ValueError(f"unknown regime fields {sorted(extra)}")
        if kind == FINITE:
            if "r" not in d:
                raise ValueError("finite regime needs 'r'")
            r = d["r"]
            if not isinstance(r, int) or isinstance(r, bool):
                raise ValueError("'r' must be an integer")
            return cls(FINITE, r)
        if "r" in d:
            raise ValueError(f"regime {kind!r} takes no 'r'")
        return cls(kind)


def triu_index(n: int, i: int, j: int) -> int:
    """Position of pair (i, j), i < j, in the row-major upper-triangle layout."""
    if not 0 <= i < j < n:
        raise ValueError(f"need 0 <= i < j < n, got i={i}, j={j}, n={n}")
    return i * n - i * (i + 1) // 2 + (j - i - 1)


def _validate_weights(regime: WeightRegime, w: np.ndarray) -> np.ndarray:
    if regime.kind == CONTINUOUS:
        w = np.asarray(w, dtype=np.float64)
        if not np.all(np.isfinite(w)) or np.any(w < 0):
            raise ValueError("continuous weights must be finite and >= 0")
        return w
    w = np.asarray(w)
    if not np.issubdtype(w.dtype, np.integer):
        wf = np.asarray(w, dtype=np.float64)
        if np.any(wf != np.floor(wf)) or not np.all(np.isfinite(wf)):
            raise ValueError("discrete weights must be integers")
        w = wf.astype(np.int64)
    else:
        w = w.astype(np.int64)
    if np.any(w < 0):
        raise ValueError("weights must be >= 0")
    if regime.kind == FINITE and np.any(w > regime.r - 1):
        raise ValueError(f"finite regime weights must be <= r-1 = {regime.r - 1}")
    return w


@dataclass(frozen=True)
class WeightedGraph:
    """Symmetric weighted graph on n >= 3 vertices, no self loops.

    weights holds the n(n-1)/2 upper-triangular entries in row-major order
    (pair (i, j) with i < j sits at triu_index(n, i, j)).
    """

    n: int
    weights: np.ndarray
    regime: WeightRegime

    def __post_init__(self) -> None:
        if self.n < 3:
            raise ValueError("graphs need at least 3 vertices")
        m = self.n * (self.n - 1) // 2
        w = _validate_weights(self.regime, self.weights)
        if w.shape != (m,):
            raise ValueError(f"expected {m} weights for n={self.n}, got shape {w.shape}")
        w = w.copy()
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    def weight(self, i: int, j: int) -> int | float:
        if i == j:
            raise ValueError("no self loops")
        if i > j:
            i, j = j, i
        w = self.weights[triu_index(self.n, i, j)]
        return float(w) if self.regime.kind == CONTINUOUS else int(w)

    def degree_sequence(self) -> DegreeSequence:
        """Row sums of the weight matrix; exact integer sums for discrete regimes."""
        iu, ju = np.triu_indices(self.n, k=1)
        dtype = np.float64 if self.regime.kind == CONTINUOUS else np.int64
        deg = np.zeros(self.n, dtype=dtype)
        np.add.at(deg, iu, self.weights)
        np.add.at(deg, ju, self.weights)
        return DegreeSequence(deg)


@dataclass(frozen=True)
class DegreeSequence:
    """Target or realized degrees; entries are finite and >= 0."""

    values: np.ndarray

    def __post_init__(self) -> None:
        v = np.asarray(self.values)
        if not np.issubdtype(v.dtype, np.integer):
            v = np.asarray(v, dtype=np.float64)
            if not np.all(np.isfinite(v)):
                raise ValueError("degrees must be finite")
        else:
            v = v.astype(np.int64)
        if v.ndim != 1 or v.shape[0] < 3:
            raise ValueError("need a 1-d sequence of length >= 3")
        if np.any(v < 0):
            raise ValueError("degrees must be >= 0")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def n(self) -> int:
        return int(self.values.shape[0])

    def as_float(self) -> np.ndarray:
        return np.asarray(self.values, dtype=np.float64)

    def total(self) -> float:
        return float(self.values.sum())

    def is_integral(self) -> bool:
        v = self.as_float()
        return bool(np.all(v == np.floor(v)))


@dataclass(frozen=True)
class Potentials:
    """Vertex potentials theta; one value per vertex, length >= 3."""

    theta: np.ndarray

    def __post_init__(self) -> None:
        t = np.asarray(self.theta, dtype=np.float64)
        if t.ndim != 1 or t.shape[0] < 3:
            raise ValueError("need a 1-d potentials vector of length >= 3")
        if not np.all(np.isfinite(t)):
            raise ValueError("potentials must be finite")
        t = t.copy()
        t.setflags(write=False)
        object.__setattr__(self, "theta", t)

    @property
    def n(self) -> int:
        return int(self.theta.shape[0])


def validate_potentials(regime: WeightRegime, theta: np.ndarray | Potentials) -> bool:
    """True when theta lies in the regime's parameter domain.

    Finite regime: all of R^n.  Positive regimes: every pairwise sum
    theta_i + theta_j (i != j) must be strictly positive, which holds iff
    the two smallest entries sum to something positive.  In particular at
    most one entry may be negative.
    """
    t = theta.theta if isinstance(theta, Potentials) else np.asarray(theta, dtype=np.float64)
    if t.ndim != 1 or t.shape[0] < 3 or not np.all(np.isfinite(t)):
        return False
    if regime.kind == FINITE:
        return True
    two_smallest = np.partition(t, 1)[:2]
    return bool(two_smallest[0] + two_smallest[1] > 0.0)


@dataclass(frozen=True)
class FitReport:
    """Outcome of a potentials fit.

    theta_hat is None when no estimate was produced (divergence).
    converged and diverged are mutually exclusive; both False means the
    iteration budget ran out without a divergence diagnosis.  residual_inf
    is the max-norm of (target degrees - expected degrees at theta_hat),
    infinite when there is no theta_hat.

    The three trailing fields are populated only when a fit is run with
    record_trace=True: per-iteration step sizes, per-iteration residuals,
    and the full iterate history (iterations+1 rows including the start).
    """

    theta_hat: np.ndarray | None
    converged: bool
    diverged: bool
    iterations: int
    residual_inf: float
    step_trace: np.ndarray | None = None
    residual_trace: np.ndarray | None = None
    iterates: np.ndarray | None = None

    def __post_init__(self) -> None:
        if self.converged and self.diverged:
            raise ValueError("a fit cannot both converge and diverge")
        if self.converged and self.theta_hat is None:
            raise ValueError("a converged fit must carry theta_hat")


# -- graph JSON ---------------------------------------------------------------


def graph_to_json_dict(g: WeightedGraph) -> dict[str, Any]:
    """Edge-list form: zero weights are omitted, indices 0-based with i < j."""
    iu, ju = np.triu_indices(g.n, k=1)
    nz = np.nonzero(g.weights)[0]
    if g.regime.kind == CONTINUOUS:
        edges = [[int(iu[k]), int(ju[k]), float(g.weights[k])] for k in nz]
    else:
        edges = [[int(iu[k]), int(ju[k]), int(g.weights[k])] for k in nz]
    return {"n": g.n, "regime": g.regime.to_json_dict(), "edges": edges}


def graph_from_json_dict(d: Any) -> WeightedGraph:
    if not isinstance(d, dict):
        raise ValueError("graph JSON must be an object")
    missing = {"n", "regime", "edges"} - set(d)
    if missing:
        raise ValueError(f"graph JSON missing fields {sorted(missing)}")
    n = d["n"]
    if not isinstance(n, int) or isinstance(n, bool) or n < 3:
        raise ValueError("'n' must be an integer >= 3")
    regime = WeightRegime.from_json_dict(d["regime"])
    m = n * (n - 1) // 2
    dtype = np.float64 if regime.kind == CONTINUOUS else np.int64
    w = np.zeros(m, dtype=dtype)
    seen: set[int] = set()
    edges = d["edges"]
    if not isinstance(edges, list):
        raise ValueError("'edges' must be a list")
    for e in edges:
        if not isinstance(e, list) or len(e) != 3:
            raise ValueError(f"edge {e!r} must be [i, j, weight]")
        i, j, wt = e
        if not isinstance(i, int) or not isinstance(j, int) or isinstance(i, bool) or isinstance(j, bool):
            raise ValueError(f"edge indices must be integers, got {e!r}")
        if not 0 <= i < j < n:
            raise ValueError(f"edge ({i}, {j}) needs 0 <= i < j < n={n}")
        k = triu_index(n, i, j)
        if k in seen:
            raise ValueError(f"duplicate edge ({i}, {j})")
        seen.add(k)
        w[k] = wt
    return WeightedGraph(n, w, regime)


def write_graph_json(g: WeightedGraph, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(graph_to_json_dict(g), fh, separators=(",", ":"))
        fh.write("\n")


def read_graph_json(path: str) -> WeightedGraph:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            d = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValueError(f"malformed graph JSON: {exc}") from exc
    return graph_from_json_dict(d)


# -- degree CSV ---------------------------------------------------------------


def format_float(x: float) -> str:
    """17 significant digits: enough for a lossless float round trip."""
    return format(float(x), ".17g")


def write_degrees_csv(d: DegreeSequence, path: str) -> None:
    v = d.values
    if np.issubdtype(v.dtype, np.integer):
        cells = [str(int(x)) for x in v]
    else:
        cells = [format_float(x) for x in v]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(cells) + "\n")


def read_vector_csv(path: str) -> np.ndarray:
    """One line of comma-separated floats (sign-unconstrained)."""
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    cells = [c.strip() for c in text.replace("\n", ",").split(",") if c.strip()]
    if not cells:
        raise ValueError(f"empty CSV: {path}")
    try:
        return np.array([float(c) for c in cells], dtype=np.float64)
    except ValueError as exc:
        raise ValueError(f"malformed CSV {path}: {exc}") from exc


def read_degrees_csv(path: str) -> DegreeSequence:
    """One line of comma-separated values; fractional entries are allowed."""
    return DegreeSequence(read_vector_csv(path))

"""Seeded sampling of graphs and their expected degrees.

Randomness comes from numpy's Philox generator, which is counter-based:
the same (seed, stream) pair yields the same weight vector on every
platform and regardless of how work is scheduled.  All edge weights for
a graph are drawn in one vectorized block in fixed upper-triangular
order, so the output never depends on thread count.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    CONTINUOUS,
    FINITE,
    DegreeSequence,
    Potentials,
    WeightedGraph,
    WeightRegime,
    validate_potentials,
)
from .meanfn import mean

_U64 = (1 << 64) - 1
_TWO53 = float(1 << 53)


@dataclass(frozen=True)
class SeededRng:
    """Keyed source of reproducible random streams.

    Distinct stream values give statistically independent substreams of
    the same seed; collisions in (seed, stream) give identical draws.
    """

    seed: int
    stream: int = 0

    def __post_init__(self) -> None:
        if not isinstance(self.seed, int) or isinstance(self.seed, bool):
            raise ValueError("seed must be an integer")
        if not isinstance(self.stream, int) or isinstance(self.stream, bool):
            raise ValueError("stream must be an integer")

    def generator(self) -> np.random.Generator:
        key = np.array([self.seed & _U64, self.stream & _U64], dtype=np.uint64)
        return np.random.Generator(np.random.Philox(key=key))

    def substream(self, stream: int) -> SeededRng:
        return SeededRng(self.seed, stream)


def _uniform_open(gen: np.random.Generator, size: int) -> np.ndarray:
    """Uniforms in the open interval (0, 1): safe to take log of."""
    return (gen.integers(0, 1 << 53, size=size).astype(np.float64) + 0.5) / _TWO53


def _as_theta(theta: Potentials | np.ndarray) -> np.ndarray:
    if isinstance(theta, Potentials):
        return theta.theta
    return Potentials(np.asarray(theta, dtype=np.float64)).theta


def sample_graph(
    regime: WeightRegime, theta: Potentials | np.ndarray, rng: SeededRng
) -> WeightedGraph:
    """Draw one graph with independent edge weights at potentials theta.

    Edge (i, j) has combined potential theta_i + theta_j.  Finite regime:
    weight sampled from the discrete law proportional to exp(-a t); the
    positive regimes use inverse-CDF exponential / geometric draws.
    """
    th = _as_theta(theta)
    if not validate_potentials(regime, th):
        raise ValueError("potentials outside the regime's parameter domain")
    n = th.shape[0]
    iu, ju = np.triu_indices(n, k=1)
    t = th[iu] + th[ju]
    m = t.shape[0]
    gen = rng.generator()
    u = _uniform_open(gen, m)
    if regime.kind == FINITE:
        r = regime.r
        a = np.arange(r, dtype=np.float64)
        x = -t[:, None] * a
        x -= x.max(axis=1, keepdims=True)
        p = np.exp(x)
        p /= p.sum(axis=1, keepdims=True)
        cdf = np.cumsum(p, axis=1)
        w = np.minimum((cdf < u[:, None]).sum(axis=1), r - 1).astype(np.int64)
    elif regime.kind == CONTINUOUS:
        w = -np.log(u) / t
    else:
        # Geometric on {0, 1, ...} with failure probability exp(-t):
        # inverse CDF is floor(log(u) / log(exp(-t))) = floor(-log(u) / t).
        w = np.floor(-np.log(u) / t).astype(np.int64)
    return WeightedGraph(n, w, regime)


def _mean_row_sums(regime: WeightRegime, th: np.ndarray) -> np.ndarray:
    """Row sums of mean(theta_i + theta_j) over j != i.

    Processes rows in blocks (bounded memory) and accumulates each row
    with Kahan compensation so the result does not depend on block size.
    """
    n = th.shape[0]
    per_entry = regime.r if regime.kind == FINITE else 1
    block = max(1, (1 << 22) // max(n * per_entry, 1))
    out = np.empty(n, dtype=np.float64)
    for start in range(0, n, block):
        stop = min(start + block, n)
        rows = stop - start
        t = th[start:stop, None] + th[None, :]
        # The diagonal is excluded from the sum; park it at a safe value
        # so the positive-regime mean does not reject it.
        ridx = np.arange(rows)
        t[ridx, np.arange(start, stop)] = 1.0
        mu = mean(regime, t)
        mu[ridx, np.arange(start, stop)] = 0.0
        s = np.zeros(rows)
        c = np.zeros(rows)
        for j in range(n):
            y = mu[:, j] - c
            tot = s + y
            c = (tot - s) - y
            s = tot
        out[start:stop] = s
    return out


def expected_degrees(
    regime: WeightRegime, theta: Potentials | np.ndarray
) -> DegreeSequence:
    """Expected degree of every vertex: sum over j != i of mean(theta_i+theta_j)."""
    th = _as_theta(theta)
    if not validate_potentials(regime, th):
        raise ValueError("potentials outside the regime's parameter domain")
    return DegreeSequence(_mean_row_sums(regime, th))

"""Realizability of degree sequences under each weight regime.

A sequence d is graphic when some graph in the regime has exactly those
weighted degrees.  For bounded integer weights this is an Erdos-Gallai
style test on the sorted sequence; for unbounded integer weights only
parity and a half-sum cap matter; for continuous weights only the
half-sum cap.

brute_force_graphical is a small independent oracle used to validate the
closed-form test: it searches weight assignments directly.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np

from .core import CONTINUOUS, FINITE, INFINITE, DegreeSequence, RegimeError, WeightRegime


@dataclass(frozen=True)
class GraphicalityVerdict:
    """graphic: overall answer.  violated_k: first prefix size where the
    finite-regime inequality fails (finite regime only, 1-based, None
    otherwise).  parity_ok: degree sum is even (always True for the
    continuous regime, where parity is vacuous)."""

    graphic: bool
    violated_k: int | None
    parity_ok: bool

    def __post_init__(self) -> None:
        if self.graphic and (not self.parity_ok or self.violated_k is not None):
            raise ValueError("a graphic verdict cannot carry violations")


def _require_integral(d: DegreeSequence, regime: WeightRegime) -> np.ndarray:
    if not d.is_integral():
        raise ValueError(f"{regime.kind} regime degrees must be integers")
    return np.asarray(d.as_float(), dtype=np.int64)


def is_graphical(regime: WeightRegime, d: DegreeSequence) -> GraphicalityVerdict:
    """Exact realizability test; integer arithmetic for the discrete regimes.

    Continuous regime: graphic iff max d_i <= (sum d_i)/2 (boundary
    included, compared exactly with no tolerance).
    Infinite regime: additionally the total must be even.
    Finite regime with weights in {0,...,r-1}: even total and, for the
    sequence sorted in decreasing order and every k,
        sum_{i<=k} d_i <= (r-1) k (k-1) + sum_{j>k} min(d_j, (r-1) k).
    """
    if regime.kind == CONTINUOUS:
        v = d.as_float()
        total = float(v.sum())
        graphic = bool(2.0 * float(v.max()) <= total)
        return GraphicalityVerdict(graphic=graphic, violated_k=None, parity_ok=True)

    v = _require_integral(d, regime)
    total = int(v.sum())
    parity_ok = total % 2 == 0

    if regime.kind == INFINITE:
        graphic = parity_ok and 2 * int(v.max()) <= total
        return GraphicalityVerdict(graphic=graphic, violated_k=None, parity_ok=parity_ok)

    # Finite regime.
    if not parity_ok:
        return GraphicalityVerdict(graphic=False, violated_k=None, parity_ok=False)
    cap = regime.r - 1
    desc = np.sort(v)[::-1]
    n = desc.shape[0]
    asc = desc[::-1]
    pref_desc = np.concatenate(([0], np.cumsum(desc)))
    pref_asc = np.concatenate(([0], np.cumsum(asc)))
    for k in range(1, n + 1):
        lhs = int(pref_desc[k])
        thr = cap * k
        # Tail d_{k+1..n} are the n-k smallest entries, i.e. asc[:n-k].
        cut = int(np.searchsorted(asc[: n - k], thr, side="right"))
        tail = int(pref_asc[cut]) + thr * (n - k - cut)
        rhs = cap * k * (k - 1) + tail
        if lhs > rhs:
            return GraphicalityVerdict(graphic=False, violated_k=k, parity_ok=True)
    return GraphicalityVerdict(graphic=True, violated_k=None, parity_ok=True)


def in_mean_interior(regime: WeightRegime, d: DegreeSequence) -> bool:
    """Strict interior of the achievable mean-degree region (positive regimes).

    Holds iff every d_i > 0 and max d_i < (sum d_i)/2, with exact float
    comparisons: boundary points (where an MLE fails to exist) count as
    outside.  The finite regime has no such closed form and raises.
    """
    if regime.kind == FINITE:
        raise RegimeError("no closed-form interior test for the finite regime")
    v = d.as_float()
    if np.any(v <= 0.0):
        return False
    return bool(2.0 * float(v.max()) < float(v.sum()))


_MAX_BRUTE_N = 6
_MAX_SEARCH_NODES = 10**8


def _search_bound(desc: list[int], cap: int) -> float:
    """Upper estimate of enumeration work: per vertex, ways to assign its
    forward edges, counted as the smaller of the cap-power and the number
    of compositions of the full degree."""
    n = len(desc)
    bound = 1.0
    for i in range(n - 1):
        m = n - 1 - i
        by_cap = float(cap + 1) ** m
        by_comp = float(comb(desc[i] + m - 1, m - 1)) if m >= 1 else 1.0
        bound *= min(by_cap, by_comp) if desc[i] > 0 else 1.0
        if bound > _MAX_SEARCH_NODES * 10:
            return bound
    return bound


def brute_force_graphical(
    regime: WeightRegime, d: DegreeSequence, weight_cap: int
) -> bool:
    """Realizability by direct search over weight assignments (oracle).

    Discrete regimes only, n <= 6.  weight_cap bounds each edge weight;
    for the finite regime it is clamped to r-1.  Refuses (raises) when
    the pruned search space estimate exceeds 1e8 nodes.
    """
    if not regime.is_discrete:
        raise RegimeError("brute force search covers the discrete regimes only")
    if d.n > _MAX_BRUTE_N:
        raise ValueError(f"brute force limited to n <= {_MAX_BRUTE_N}")
    if not isinstance(weight_cap, int) or isinstance(weight_cap, bool) or weight_cap < 0:
        raise ValueError("weight_cap must be an integer >= 0")
    v = _require_integral(d, regime)
    cap = weight_cap if regime.kind == INFINITE else min(weight_cap, regime.r - 1)
    desc = sorted((int(x) for x in v), reverse=True)
    if desc and desc[-1] < 0:
        return False
    if _search_bound(desc, cap) > _MAX_SEARCH_NODES:
        raise ValueError(
            "search space above 1e8 assignments; refusing brute force enumeration"
        )

    memo: dict[tuple[int, ...], bool] = {}

    def realizable(resid: tuple[int, ...]) -> bool:
        while resid and resid[-1] == 0:
            resid = resid[:-1]
        if not resid:
            return True
        if len(resid) == 1:
            return False
        hit = memo.get(resid)
        if hit is not None:
            return hit
        s = resid[0]
        rest = list(resid[1:])
        m = len(rest)
        # Largest amount still assignable from vertex 0 at or after slot k.
        suffix = [0] * (m + 1)
        for k in range(m - 1, -1, -1):
            suffix[k] = suffix[k + 1] + min(cap, rest[k])
        if s > suffix[0]:
            memo[resid] = False
            return False

        def place(k: int, remaining: int) -> bool:
            if remaining > suffix[k]:
                return False
            if k == m:
                return realizable(tuple(sorted(rest, reverse=True)))
            top = min(cap, rest[k], remaining)
            ok = False
            for w in range(top, -1, -1):
                rest[k] -= w
                ok = place(k + 1, remaining - w)
                rest[k] += w
                if ok:
                    break
            return ok

        out = place(0, s)
        memo[resid] = out
        return out

    return realizable(tuple(desc))

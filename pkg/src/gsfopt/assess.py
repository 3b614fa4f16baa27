"""Quality indicators, attainment surfaces and statistics for comparing optimizers.

All sets are minimization objective vectors. The hypervolume reference point
is the nadir of a sampled optimal front.
"""

from __future__ import annotations

import itertools
import math
from collections.abc import Mapping, Sequence
from dataclasses import dataclass

import numpy as np

from .core import DimensionError, RngStream, nondominated_mask


class DegenerateReferenceError(ValueError):
    """The reference front spans zero extent in some objective."""


MC_SAMPLES = 1_000_000


def _as_set(points, M: int | None = None) -> np.ndarray:
    P = np.asarray(points, dtype=float)
    if P.size == 0:
        return np.empty((0, M or (P.shape[-1] if P.ndim == 2 else 0)))
    P = np.atleast_2d(P)
    if M is not None and P.shape[1] != M:
        raise DimensionError(f"expected {M} objectives, got {P.shape[1]}")
    return P


def _ratio_max(T: np.ndarray, p: np.ndarray) -> np.ndarray:
    """max_i ratio(a_i, p_i) for every row a of T against one reference point p."""
    with np.errstate(divide="ignore", invalid="ignore"):
        R = T / p
    zero = p == 0.0
    if zero.any():
        R[:, zero] = np.where(T[:, zero] > 0.0, np.inf, 1.0)
    return R.max(axis=1)


def epsilon_indicator(T, O, additive: bool = False, chunk: int = 2048) -> float:
    """Smallest epsilon such that T epsilon-dominates every point of O.

    Multiplicative form by default (``a_i <= eps * p_i``); ``additive`` gives
    ``a_i <= eps + p_i``. For p_i = 0 the multiplicative ratio is +inf when
    a_i > 0 and 1 when a_i = 0. Empty T yields +inf.
    """
    O = _as_set(O)
    if O.shape[0] == 0:
        raise ValueError("reference set is empty")
    T = _as_set(T, O.shape[1])
    if T.shape[0] == 0:
        return math.inf
    if not additive and (np.any(T < 0.0) or np.any(O < 0.0)):
        raise ValueError("multiplicative epsilon needs non-negative coordinates")
    worst = -math.inf
    for start in range(0, O.shape[0], chunk):
        block = O[start : start + chunk]
        if additive:
            vals = (T[None, :, :] - block[:, None, :]).max(axis=2)
        else:
            with np.errstate(divide="ignore", invalid="ignore"):
                R = T[None, :, :] / block[:, None, :]
            zero = block == 0.0
            if zero.any():
                pos = np.broadcast_to(T[None, :, :] > 0.0, R.shape)
                zmask = np.broadcast_to(zero[:, None, :], R.shape)
                R = np.where(zmask, np.where(pos, np.inf, 1.0), R)
            vals = R.max(axis=2)
        worst = max(worst, float(vals.min(axis=1).max()))
    return worst


def _hv2d(P: np.ndarray, ref: np.ndarray) -> float:
    P = P[np.all(P < ref, axis=1)]
    if P.shape[0] == 0:
        return 0.0
    P = P[np.lexsort((P[:, 1], P[:, 0]))]
    best_y = np.minimum.accumulate(P[:, 1])
    # only points that lower the running minimum of y contribute a new step
    keep = np.concatenate([[True], best_y[1:] < best_y[:-1]])
    S = P[keep]
    xs = np.append(S[1:, 0], ref[0])
    return float(np.sum((xs - S[:, 0]) * (ref[1] - S[:, 1])))


def _hv3d(P: np.ndarray, ref: np.ndarray) -> float:
    P = P[np.all(P < ref, axis=1)]
    if P.shape[0] == 0:
        return 0.0
    P = P[np.argsort(P[:, 2], kind="stable")]
    zs = np.append(P[:, 2], ref[2])
    vol = 0.0
    for i in range(P.shape[0]):
        depth = zs[i + 1] - zs[i]
        if depth > 0.0:
            vol += depth * _hv2d(P[: i + 1, :2], ref[:2])
    return vol


def hypervolume_mc(points, ref, samples: int = MC_SAMPLES, rng: RngStream | None = None, chunk: int = 20000):
    """Monte Carlo hypervolume; returns ``(estimate, standard_error)``."""
    ref = np.asarray(ref, dtype=float)
    P = _as_set(points, ref.size)
    P = P[np.all(P < ref, axis=1)]
    if P.shape[0] == 0:
        return 0.0, 0.0
    P = P[nondominated_mask(P)]
    rng = rng or RngStream(0, "hypervolume")
    lo = P.min(axis=0)
    box = float(np.prod(ref - lo))
    hits = 0
    done = 0
    while done < samples:
        m = min(chunk, samples - done)
        U = lo + rng.random((m, ref.size)) * (ref - lo)
        dom = np.zeros(m, dtype=bool)
        for start in range(0, P.shape[0], 256):
            blk = P[start : start + 256]
            dom |= np.all(blk[None, :, :] <= U[:, None, :], axis=2).any(axis=1)
        hits += int(dom.sum())
        done += m
    frac = hits / samples
    return box * frac, box * math.sqrt(frac * (1.0 - frac) / samples)


def hypervolume(points, ref, samples: int = MC_SAMPLES, rng: RngStream | None = None) -> float:
    """Volume weakly dominated by ``points`` and bounded by ``ref``.

    Exact for two and three objectives, Monte Carlo beyond. Points not
    strictly better than ``ref`` in every objective contribute nothing.
    """
    ref = np.asarray(ref, dtype=float)
    P = _as_set(points, ref.size)
    if ref.size == 2:
        return _hv2d(P, ref)
    if ref.size == 3:
        return _hv3d(P, ref)
    return hypervolume_mc(P, ref, samples, rng)[0]


@dataclass(frozen=True)
class ReferenceData:
    front: np.ndarray
    nadir: np.ndarray

    @classmethod
    def from_front(cls, front) -> ReferenceData:
        F = _as_set(front)
        if F.shape[0] == 0:
            raise DegenerateReferenceError("reference front is empty")
        nadir = F.max(axis=0)
        if np.any(nadir - F.min(axis=0) <= 0.0):
            raise DegenerateReferenceError("reference front has zero extent in some objective")
        return cls(F, nadir)

    @property
    def M(self) -> int:
        return self.front.shape[1]


def hypervolume_indicator(
    T,
    ref: ReferenceData,
    samples: int = MC_SAMPLES,
    rng: RngStream | None = None,
    front_hv: float | None = None,
) -> float:
    """HV(front) - HV(T) at the nadir; negative when T beats the sampled front.

    ``front_hv`` lets callers reuse a precomputed front hypervolume.
    """
    if ref.M < 2:
        raise DimensionError("hypervolume needs at least two objectives")
    T = _as_set(T, ref.M)
    hv_front = front_hv if front_hv is not None else hypervolume(ref.front, ref.nadir, samples, rng)
    return hv_front - hypervolume(T, ref.nadir, samples, rng)


def attainment_surface_50(runs: Sequence) -> np.ndarray:
    """Boundary of the region weakly dominated by at least half of the runs.

    Returns the staircase corners ``(x, y)`` with x increasing and y strictly
    decreasing. At each distinct x the y-level is the ceil(R/2)-th smallest of
    the per-run attained levels.
    """
    sets = [_as_set(r) for r in runs]
    if len(sets) < 2:
        raise ValueError("need at least two runs")
    if any(s.shape[1] != 2 for s in sets if s.size) or all(s.size == 0 for s in sets):
        raise DimensionError("attainment surfaces are supported for two objectives only")
    xs = np.unique(np.concatenate([s[:, 0] for s in sets if s.size]))
    levels = np.full((len(sets), xs.size), np.inf)
    for r, S in enumerate(sets):
        if S.size == 0:
            continue
        S = S[np.argsort(S[:, 0], kind="stable")]
        running = np.minimum.accumulate(S[:, 1])
        pos = np.searchsorted(S[:, 0], xs, side="right") - 1
        ok = pos >= 0
        levels[r, ok] = running[pos[ok]]
    need = math.ceil(len(sets) / 2)
    y = np.sort(levels, axis=0)[need - 1]
    finite = np.isfinite(y)
    xs, y = xs[finite], y[finite]
    keep = np.concatenate([[True], y[1:] < y[:-1]]) if y.size else np.zeros(0, dtype=bool)
    return np.column_stack([xs[keep], y[keep]])


def _midranks(values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    order = np.argsort(values, kind="stable")
    sv = values[order]
    ranks = np.empty(values.size)
    _, start, counts = np.unique(sv, return_index=True, return_counts=True)
    for st, c in zip(start, counts):
        ranks[order[st : st + c]] = st + (c + 1) / 2.0
    return ranks, counts


def mann_whitney(a, b) -> float:
    """One-sided p-value for H1: values of ``a`` tend to be smaller than ``b``.

    Exact enumeration of rank-sum assignments when the samples total at most
    12 values; otherwise the normal approximation with tie and continuity
    corrections. Identical values throughout give 0.5.
    """
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    n1, n2 = a.size, b.size
    if n1 < 2 or n2 < 2:
        raise ValueError("each sample needs at least two values")
    pooled = np.concatenate([a, b])
    if np.all(pooled == pooled[0]):
        return 0.5
    ranks, ties = _midranks(pooled)
    n = n1 + n2
    r1 = ranks[:n1].sum()
    if n <= 12:
        total = 0
        hits = 0
        for combo in itertools.combinations(range(n), n1):
            total += 1
            if ranks[list(combo)].sum() <= r1 + 1e-9:
                hits += 1
        return hits / total
    u = r1 - n1 * (n1 + 1) / 2.0
    mu = n1 * n2 / 2.0
    tie_term = float(np.sum(ties.astype(float) ** 3 - ties)) / (n * (n - 1))
    sigma = math.sqrt(n1 * n2 / 12.0 * ((n + 1) - tie_term))
    if sigma == 0.0:
        return 0.5
    z = (u + 0.5 - mu) / sigma
    return 0.5 * math.erfc(-z / math.sqrt(2.0))


@dataclass(frozen=True)
class Summary:
    mean: float
    sd: float
    best: bool
    n: int


def summarize(samples: Mapping[str, Sequence[float]]) -> dict[str, Summary]:
    """Mean and sample sd per algorithm; flags the best mean and those within its sd."""
    if not samples:
        return {}
    stats = {}
    for name, vals in samples.items():
        v = np.asarray(vals, dtype=float)
        if v.size == 0:
            raise ValueError(f"no samples for {name!r}")
        stats[name] = (float(v.mean()), float(v.std(ddof=1)) if v.size > 1 else 0.0, v.size)
    best_name = min(stats, key=lambda k: stats[k][0])
    limit = stats[best_name][0] + stats[best_name][1]
    return {k: Summary(m, s, m <= limit, n) for k, (m, s, n) in stats.items()}

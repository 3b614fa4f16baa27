"""WFG1-WFG9 scalable test problems, vectorized over batches of vectors.

Decision variable ``z_i`` lives in ``[0, 2i]`` (1-based ``i``); objective
``f_m`` in ``[0, 2m]``. The first ``k`` variables are position parameters and
the remaining ``l`` are distance parameters.

Vectors outside the box are evaluated at their projection onto the box, so
they get finite objectives; feasibility is tracked separately by
:class:`gsfopt.core.Problem`.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .core import DimensionError, Problem, RngStream, nondominated_mask

_EPS = 1.0e-10
_PI = np.pi


def _c01(a: np.ndarray) -> np.ndarray:
    # snaps rounding noise just outside [0, 1] back onto the interval
    a = np.where((a <= 0.0) & (a >= -_EPS), 0.0, a)
    return np.where((a >= 1.0) & (a <= 1.0 + _EPS), 1.0, a)


# -- transformation functions ------------------------------------------------


def b_poly(y, alpha):
    return _c01(np.power(y, alpha))


def b_flat(y, a, b, c):
    tmp1 = np.minimum(0.0, np.floor(y - b)) * a * (b - y) / b
    tmp2 = np.minimum(0.0, np.floor(c - y)) * (1.0 - a) * (y - c) / (1.0 - c)
    return _c01(a + tmp1 - tmp2)


def b_param(y, u, a, b, c):
    v = a - (1.0 - 2.0 * u) * np.abs(np.floor(0.5 - u) + a)
    return _c01(np.power(y, b + (c - b) * v))


def s_linear(y, a):
    return _c01(np.abs(y - a) / np.abs(np.floor(a - y) + a))


def s_decept(y, a, b, c):
    tmp1 = np.floor(y - a + b) * (1.0 - c + (a - b) / b) / (a - b)
    tmp2 = np.floor(a + b - y) * (1.0 - c + (1.0 - a - b) / b) / (1.0 - a - b)
    return _c01(1.0 + (np.abs(y - a) - b) * (tmp1 + tmp2 + 1.0 / b))


def s_multi(y, a, b, c):
    tmp1 = np.abs(y - c) / (2.0 * (np.floor(c - y) + c))
    tmp2 = (4.0 * a + 2.0) * _PI * (0.5 - tmp1)
    return _c01((1.0 + np.cos(tmp2) + 4.0 * b * tmp1**2) / (b + 2.0))


def r_sum(y: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Weighted mean over the last axis."""
    w = np.asarray(w, dtype=float)
    return _c01((y * w).sum(axis=-1) / w.sum())


def r_nonsep(y: np.ndarray, a: int) -> np.ndarray:
    n = y.shape[-1]
    total = y.sum(axis=-1)
    for k in range(a - 1):
        total = total + np.abs(y - np.roll(y, -(k + 1), axis=-1)).sum(axis=-1)
    half = np.ceil(a / 2.0)
    return _c01(total / (n * half * (1.0 + 2.0 * a - 2.0 * half) / a))


# -- shape functions ---------------------------------------------------------


def _convex(x: np.ndarray, m: int) -> np.ndarray:
    M = x.shape[1]
    out = np.prod(1.0 - np.cos(x[:, : M - m] * _PI / 2.0), axis=1)
    if m != 1:
        out = out * (1.0 - np.sin(x[:, M - m] * _PI / 2.0))
    return _c01(out)


def _concave(x: np.ndarray, m: int) -> np.ndarray:
    M = x.shape[1]
    out = np.prod(np.sin(x[:, : M - m] * _PI / 2.0), axis=1)
    if m != 1:
        out = out * np.cos(x[:, M - m] * _PI / 2.0)
    return _c01(out)


def _linear(x: np.ndarray, m: int) -> np.ndarray:
    M = x.shape[1]
    out = np.prod(x[:, : M - m], axis=1)
    if m != 1:
        out = out * (1.0 - x[:, M - m])
    return _c01(out)


def _mixed(x: np.ndarray, a: int, alpha: float) -> np.ndarray:
    tmp = 2.0 * a * _PI
    return _c01(np.power(1.0 - x[:, 0] - np.cos(tmp * x[:, 0] + _PI / 2.0) / tmp, alpha))


def _disc(x: np.ndarray, a: int, alpha: float, beta: float) -> np.ndarray:
    tmp = a * np.power(x[:, 0], beta) * _PI
    return _c01(1.0 - np.power(x[:, 0], alpha) * np.cos(tmp) ** 2)


# -- problem definitions -----------------------------------------------------


def _position_groups(t: np.ndarray, k: int, M: int, w: np.ndarray | None = None) -> list[np.ndarray]:
    """Weighted-sum reduction into M-1 position groups plus one distance group."""
    n = t.shape[1]
    if w is None:
        w = np.ones(n)
    gs = k // (M - 1)
    out = [r_sum(t[:, i * gs : (i + 1) * gs], w[i * gs : (i + 1) * gs]) for i in range(M - 1)]
    out.append(r_sum(t[:, k:n], w[k:n]))
    return out


def _nonsep_groups(t: np.ndarray, k: int, M: int) -> list[np.ndarray]:
    n = t.shape[1]
    gs = k // (M - 1)
    out = [r_nonsep(t[:, i * gs : (i + 1) * gs], gs) for i in range(M - 1)]
    out.append(r_nonsep(t[:, k:n], n - k))
    return out


def _linear_distance(y: np.ndarray, k: int) -> np.ndarray:
    t = y.copy()
    t[:, k:] = s_linear(y[:, k:], 0.35)
    return t


def _pairwise_nonsep(y: np.ndarray, k: int) -> np.ndarray:
    l = y.shape[1] - k
    pairs = y[:, k:].reshape(y.shape[0], l // 2, 2)
    return np.hstack([y[:, :k], r_nonsep(pairs, 2)])


def _wfg1(y, k, M):
    t = _linear_distance(y, k)
    t[:, k:] = b_flat(t[:, k:], 0.8, 0.75, 0.85)
    t = b_poly(t, 0.02)
    return _position_groups(t, k, M, w=2.0 * np.arange(1, y.shape[1] + 1))


def _wfg2(y, k, M):
    t = _pairwise_nonsep(_linear_distance(y, k), k)
    return _position_groups(t, k, M)


def _wfg4(y, k, M):
    return _position_groups(s_multi(y, 30, 10, 0.35), k, M)


def _wfg5(y, k, M):
    return _position_groups(s_decept(y, 0.35, 0.001, 0.05), k, M)


def _wfg6(y, k, M):
    return _nonsep_groups(_linear_distance(y, k), k, M)


_BP = (0.98 / 49.98, 0.02, 50.0)


def _suffix_means(y: np.ndarray) -> np.ndarray:
    """Column i holds the mean of y[:, i+1:] (last column undefined)."""
    n = y.shape[1]
    tail = np.cumsum(y[:, ::-1], axis=1)[:, ::-1]
    out = np.empty_like(y)
    out[:, :-1] = tail[:, 1:] / np.arange(n - 1, 0, -1)
    return _c01(out)


def _prefix_means(y: np.ndarray) -> np.ndarray:
    """Column i holds the mean of y[:, :i] (first column undefined)."""
    n = y.shape[1]
    head = np.cumsum(y, axis=1)
    out = np.empty_like(y)
    out[:, 1:] = head[:, :-1] / np.arange(1, n)
    return _c01(out)


def _wfg7(y, k, M):
    t = y.copy()
    t[:, :k] = b_param(y[:, :k], _suffix_means(y)[:, :k], *_BP)
    return _position_groups(_linear_distance(t, k), k, M)


def _wfg8(y, k, M):
    t = y.copy()
    t[:, k:] = b_param(y[:, k:], _prefix_means(y)[:, k:], *_BP)
    return _position_groups(_linear_distance(t, k), k, M)


def _wfg9(y, k, M):
    t = y.copy()
    t[:, :-1] = b_param(y[:, :-1], _suffix_means(y)[:, :-1], *_BP)
    t[:, :k] = s_decept(t[:, :k], 0.35, 0.001, 0.05)
    t[:, k:] = s_multi(t[:, k:], 30, 95, 0.35)
    return _nonsep_groups(t, k, M)


_TRANSFORMS = {1: _wfg1, 2: _wfg2, 3: _wfg2, 4: _wfg4, 5: _wfg5, 6: _wfg6, 7: _wfg7, 8: _wfg8, 9: _wfg9}


def _shape(index: int, x: np.ndarray) -> np.ndarray:
    M = x.shape[1]
    if index == 1:
        h = [_convex(x, m) for m in range(1, M)] + [_mixed(x, 5, 1.0)]
    elif index == 2:
        h = [_convex(x, m) for m in range(1, M)] + [_disc(x, 5, 1.0, 1.0)]
    elif index == 3:
        h = [_linear(x, m) for m in range(1, M + 1)]
    else:
        h = [_concave(x, m) for m in range(1, M + 1)]
    return np.column_stack(h)


@dataclass(frozen=True)
class WfgInstance:
    """One WFG problem configuration (defaults: 4 position, 20 distance parameters)."""

    index: int
    M: int
    k: int = 4
    l: int = 20

    def __post_init__(self) -> None:
        if self.index not in range(1, 10):
            raise DimensionError(f"WFG index must be in 1..9, got {self.index}")
        if self.M < 2:
            raise DimensionError("WFG problems need at least two objectives")
        if self.k < 1 or self.l < 1 or self.k % (self.M - 1) != 0:
            raise DimensionError(f"k={self.k} must be a positive multiple of M-1={self.M - 1}")
        if self.index in (2, 3) and self.l % 2 != 0:
            raise DimensionError("WFG2 and WFG3 need an even number of distance parameters")

    @property
    def n(self) -> int:
        return self.k + self.l

    @property
    def name(self) -> str:
        return f"WFG{self.index}"

    @cached_property
    def upper(self) -> np.ndarray:
        return 2.0 * np.arange(1, self.n + 1)

    @property
    def objective_upper(self) -> np.ndarray:
        """Componentwise bound of the objective space, f_m <= 2m."""
        return 2.0 * np.arange(1, self.M + 1)

    @property
    def id(self) -> str:
        return f"{self.name}-M{self.M}-k{self.k}-l{self.l}"

    def evaluate(self, Z: np.ndarray) -> np.ndarray:
        return wfg_evaluate(self, Z)

    def problem(self) -> Problem:
        return Problem(
            id=self.id,
            M=self.M,
            n=self.n,
            lower=np.zeros(self.n),
            upper=self.upper,
            evaluate=self.evaluate,
        )


def parse_problem(name: str, M: int, k: int = 4, l: int = 20) -> WfgInstance:
    """``"WFG4"`` (case-insensitive) to an instance."""
    s = name.strip().upper()
    if not s.startswith("WFG") or not s[3:].isdigit():
        raise ValueError(f"unknown problem {name!r}")
    return WfgInstance(int(s[3:]), M, k, l)


def instance_from_id(problem_id: str) -> WfgInstance:
    """Inverse of :attr:`WfgInstance.id`, e.g. ``"WFG4-M2-k4-l20"``."""
    try:
        name, m, k, l = problem_id.strip().split("-")
        if m[0] != "M" or k[0] != "k" or l[0] != "l":
            raise ValueError
        return parse_problem(name, int(m[1:]), int(k[1:]), int(l[1:]))
    except (ValueError, IndexError):
        raise ValueError(f"malformed problem id {problem_id!r}") from None


def wfg_evaluate(instance: WfgInstance, z: np.ndarray) -> np.ndarray:
    """Objective vectors for one vector ``(n,)`` or a batch ``(N, n)``."""
    z = np.asarray(z, dtype=float)
    single = z.ndim == 1
    Z = np.atleast_2d(z)
    if Z.ndim != 2 or Z.shape[1] != instance.n:
        raise DimensionError(f"{instance.name} expects {instance.n} variables, got shape {z.shape}")
    f = _evaluate_normalized(instance, np.clip(Z / instance.upper, 0.0, 1.0))
    return f[0] if single else f


def _evaluate_normalized(instance: WfgInstance, y: np.ndarray) -> np.ndarray:
    t = np.column_stack(_TRANSFORMS[instance.index](y, instance.k, instance.M))
    M = instance.M
    A = np.ones(M - 1)
    if instance.index == 3:
        A[1:] = 0.0
    x = np.empty_like(t)
    x[:, :-1] = np.maximum(t[:, -1:], A) * (t[:, :-1] - 0.5) + 0.5
    x[:, -1] = t[:, -1]
    return x[:, -1:] + 2.0 * np.arange(1, M + 1) * _shape(instance.index, x)


def optimal_decision_vectors(instance: WfgInstance, position: np.ndarray) -> np.ndarray:
    """Pareto-optimal decision vectors for normalized position parameters in [0, 1]."""
    return _optimal_normalized(instance, position) * instance.upper


def _optimal_normalized(instance: WfgInstance, position: np.ndarray) -> np.ndarray:
    position = np.atleast_2d(np.asarray(position, dtype=float))
    k, l = instance.k, instance.l
    N = position.shape[0]
    y = np.empty((N, k + l))
    y[:, :k] = position
    if instance.index == 8:
        for i in range(k, k + l):
            u = r_sum(y[:, :i], np.ones(i))
            tmp1 = np.abs(np.floor(0.5 - u) + 0.98 / 49.98)
            tmp2 = 0.02 + 49.98 * (0.98 / 49.98 - (1.0 - 2.0 * u) * tmp1)
            y[:, i] = np.power(0.35, 1.0 / tmp2)
    elif instance.index == 9:
        y[:, k + l - 1] = 0.35
        for i in range(k + l - 2, k - 1, -1):
            tail = y[:, i + 1 : k + l]
            u = r_sum(tail, np.ones(tail.shape[1]))
            y[:, i] = np.power(0.35, 1.0 / (0.02 + 1.96 * u))
    else:
        y[:, k:] = 0.35
    return y


def wfg_front_samples(instance: WfgInstance, count: int, rng: RngStream) -> np.ndarray:
    """Non-dominated objective vectors sampled on the optimal front.

    Position parameters are drawn uniformly (WFG1 compensates its polynomial
    bias the way the toolkit's own sampler does), distance parameters are
    fixed at their optimum.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    u = rng.random((count, instance.k))
    if instance.index == 1:
        u = u**50.0
    # Evaluated in normalized space: 0.35 * upper / upper is not always 0.35
    # again, and WFG1's b_poly(., 0.02) magnifies that residue to about 0.07.
    F = _evaluate_normalized(instance, _optimal_normalized(instance, u))
    return F[nondominated_mask(F)]

"""The General Subpopulation Framework.

A configuration is the 4-tuple of strategies, a size vector and a set of
interaction matrices; the populations themselves are derived run state.
Interaction 1 routes DE parent sampling between subpopulations; interaction 2
routes newly created solutions to novelty archives.
"""

from __future__ import annotations

import configparser
import io
from collections.abc import Callable, Mapping, Sequence
from dataclasses import dataclass, field, replace

import numpy as np

from .core import DimensionError, Population, Problem, RngStream, nondominated_mask
from .de import DeParams, ParentSampler, de_generation_step, local_parents
from .forces import ForceHistogram
from .gde3 import PruneParams, gde3_generation_step
from .novelty import NoveltyArchive, NoveltyParams, default_n_min0, mona_generation_step
from .wfg import instance_from_id

PARENT_SAMPLING = 1
ARCHIVE_OFFER = 2

STRATEGY_KINDS = ("de", "gde3", "mona")
PRESETS = ("SAN", "SAGDE", "GDE3", "MONA", "DE_per_objective")

_MAX_RESAMPLES = 100


class ConfigError(ValueError):
    """Invalid framework configuration."""


class DisabledInteractionError(ValueError):
    """A sampled interaction row is all zero."""


class IsolationError(ValueError):
    """A restricted-mating point has no neighbor within sigma."""

    def __init__(self, index: int) -> None:
        super().__init__(f"point {index} has no neighbor within sigma")
        self.index = index


class BudgetError(RuntimeError):
    """The configured evaluation budget would be exceeded."""


@dataclass(frozen=True)
class SizeVector:
    ratios: tuple[float, ...]
    total: int

    def __post_init__(self) -> None:
        r = tuple(float(v) for v in self.ratios)
        object.__setattr__(self, "ratios", r)
        if not r:
            raise ConfigError("size vector is empty")
        # a single subpopulation legitimately holds ratio 1
        if any(not 0.0 < v <= 1.0 for v in r) or (len(r) > 1 and any(v >= 1.0 for v in r)):
            raise ConfigError(f"ratios must lie in (0, 1): {r}")
        if abs(sum(r) - 1.0) > 1e-9:
            raise ConfigError(f"ratios must sum to 1, got {sum(r)!r}")
        if self.total < 1:
            raise ConfigError("total size must be positive")

    def sizes(self) -> tuple[int, ...]:
        """Integer sizes by largest-remainder rounding; ties go to the lower index."""
        quota = np.round(np.array(self.ratios) * self.total, 9)
        base = np.floor(quota).astype(int)
        short = self.total - int(base.sum())
        order = np.argsort(-(quota - base), kind="stable")
        base[order[:short]] += 1
        return tuple(int(v) for v in base)


@dataclass(frozen=True)
class InteractionMatrix:
    entries: np.ndarray
    interaction: int = PARENT_SAMPLING

    def __post_init__(self) -> None:
        P = np.array(self.entries, dtype=float)
        if P.ndim != 2 or P.shape[0] != P.shape[1] or P.shape[0] == 0:
            raise DimensionError(f"interaction matrix must be square and non-empty, got shape {P.shape}")
        if np.any(P < 0.0) or np.any(P > 1.0):
            raise ConfigError("interaction probabilities must lie in [0, 1]")
        if not (np.all(P == 0.0) or np.allclose(P.sum(axis=1), 1.0, rtol=0.0, atol=1e-9)):
            raise ConfigError("every row must sum to 1 (or the whole matrix must be zero)")
        P.setflags(write=False)
        object.__setattr__(self, "entries", P)

    @property
    def s(self) -> int:
        return self.entries.shape[0]

    @property
    def disabled(self) -> bool:
        return bool(np.all(self.entries == 0.0))

    def one_hot(self, row: int) -> int | None:
        """Column holding all of ``row``'s mass, if there is one."""
        r = self.entries[row]
        hits = np.flatnonzero(r == 1.0)
        return int(hits[0]) if hits.size else None

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, InteractionMatrix)
            and self.interaction == other.interaction
            and np.array_equal(self.entries, other.entries)
        )

    def __hash__(self) -> int:
        return hash((self.interaction, self.entries.tobytes()))


@dataclass(frozen=True)
class InteractionMatrixSet:
    matrices: tuple[InteractionMatrix, ...] = ()

    def __post_init__(self) -> None:
        ms = tuple(self.matrices)
        object.__setattr__(self, "matrices", ms)
        if len({m.s for m in ms}) > 1:
            raise DimensionError("all interaction matrices must share one dimension")
        if len({m.interaction for m in ms}) != len(ms):
            raise ConfigError("duplicate interaction ids")

    @property
    def s(self) -> int | None:
        return self.matrices[0].s if self.matrices else None

    def get(self, interaction: int) -> InteractionMatrix | None:
        for m in self.matrices:
            if m.interaction == interaction:
                return m
        return None


def sample_source_subpop(im: InteractionMatrix, acting_subpop: int, rng: RngStream) -> int:
    row = im.entries[acting_subpop]
    if not row.any():
        raise DisabledInteractionError(f"interaction {im.interaction} is disabled for subpopulation {acting_subpop}")
    hot = im.one_hot(acting_subpop)
    if hot is not None:
        return hot
    return int(rng.choice(im.s, p=row))


def uniform_im(s: int, interaction: int = PARENT_SAMPLING) -> InteractionMatrix:
    if s < 1:
        raise DimensionError("s must be at least 1")
    return InteractionMatrix(np.full((s, s), 1.0 / s), interaction)


def archive_offer_im(s: int, archive_col: int, interaction: int = ARCHIVE_OFFER) -> InteractionMatrix:
    if s < 1:
        raise DimensionError("s must be at least 1")
    if not 0 <= archive_col < s:
        raise IndexError(f"archive column {archive_col} outside 0..{s - 1}")
    P = np.zeros((s, s))
    P[:, archive_col] = 1.0
    return InteractionMatrix(P, interaction)


def island_im(s: int, migration: np.ndarray | None = None) -> InteractionMatrix:
    """Migration between islands; an interaction always targets another island.

    Without ``migration`` every other island is equally likely.
    """
    if s < 2:
        raise DimensionError("an island model needs at least two islands")
    if migration is None:
        P = np.full((s, s), 1.0 / (s - 1))
        np.fill_diagonal(P, 0.0)
    else:
        P = np.array(migration, dtype=float)
        if P.shape != (s, s):
            raise DimensionError(f"migration matrix must be {s}x{s}")
        if np.any(np.diag(P) != 0.0):
            raise ConfigError("island migration matrix must have a zero diagonal")
    return InteractionMatrix(P)


def cellular_im(width: int, height: int) -> InteractionMatrix:
    """Toroidal von Neumann grid, one cell per subpopulation, row-major numbering.

    On grids narrower than 3 a neighbor can repeat; its share accumulates.
    """
    if width < 1 or height < 1:
        raise DimensionError("grid dimensions must be positive")
    s = width * height
    P = np.zeros((s, s))
    for r in range(height):
        for c in range(width):
            a = r * width + c
            for dr, dc in ((-1, 0), (1, 0), (0, -1), (0, 1)):
                P[a, ((r + dr) % height) * width + (c + dc) % width] += 0.25
    return InteractionMatrix(P)


def restricted_mating_im(
    points: np.ndarray,
    sigma: float,
    dist: Callable[[np.ndarray, np.ndarray], float] | None = None,
) -> InteractionMatrix:
    """u_ab = 1 when a != b are closer than ``sigma``, rows normalized."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    s = pts.shape[0]
    if dist is None:
        D = np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=2)
    else:
        D = np.array([[dist(pts[a], pts[b]) for b in range(s)] for a in range(s)])
    U = (D < sigma).astype(float)
    np.fill_diagonal(U, 0.0)
    sums = U.sum(axis=1)
    for a in range(s):
        if sums[a] == 0.0:
            raise IsolationError(a)
    return InteractionMatrix(U / sums[:, None])


def build_topology_im(kind: str, **kwargs) -> InteractionMatrix:
    """Dispatch to ``island``, ``cellular`` or ``restricted_mating`` builders."""
    builders = {"island": island_im, "cellular": cellular_im, "restricted_mating": restricted_mating_im}
    if kind not in builders:
        raise ConfigError(f"unknown topology {kind!r}")
    return builders[kind](**kwargs)


@dataclass(frozen=True)
class Strategy:
    kind: str
    F: float
    CR: float
    objective_index: int = 0
    prune_k: int | None = None

    def __post_init__(self) -> None:
        if self.kind not in STRATEGY_KINDS:
            raise ConfigError(f"unknown strategy {self.kind!r}")
        DeParams(self.F, self.CR, self.objective_index)

    @property
    def de_params(self) -> DeParams:
        return DeParams(self.F, self.CR, self.objective_index)


@dataclass(frozen=True)
class GsfConfig:
    strategies: tuple[Strategy, ...]
    sizes: SizeVector
    im: InteractionMatrixSet
    problem: Problem
    generations: int
    novelty: NoveltyParams | None = None
    offer_rejected: bool = True
    max_evaluations: int | None = None
    record_forces: bool = True
    im_supplier: Callable[[int], InteractionMatrixSet] | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "strategies", tuple(self.strategies))
        s = len(self.strategies)
        if s != len(self.sizes.ratios):
            raise ConfigError(f"{s} strategies but {len(self.sizes.ratios)} size ratios")
        if self.im.s is not None and self.im.s != s:
            raise ConfigError(f"interaction matrices are {self.im.s}x{self.im.s}, expected {s}x{s}")
        if self.generations < 1:
            raise ConfigError("generations must be at least 1")
        if any(st.kind == "mona" for st in self.strategies) and self.novelty is None:
            raise ConfigError("a MONA subpopulation needs novelty parameters")
        for st in self.strategies:
            if st.objective_index >= self.problem.M:
                raise ConfigError(f"objective index {st.objective_index} out of range for M={self.problem.M}")
        if any(n < 1 for n in self.sizes.sizes()):
            raise ConfigError(f"size vector realizes an empty subpopulation: {self.sizes.sizes()}")

    @property
    def s(self) -> int:
        return len(self.strategies)

    def to_text(self) -> str:
        cp = configparser.ConfigParser()
        cp.optionxform = str
        cp["gsf"] = {
            "problem": self.problem.id,
            "generations": str(self.generations),
            "total_size": str(self.sizes.total),
            "S": ", ".join(repr(r) for r in self.sizes.ratios),
            "offer_rejected": str(self.offer_rejected).lower(),
            "max_evaluations": "" if self.max_evaluations is None else str(self.max_evaluations),
            "record_forces": str(self.record_forces).lower(),
        }
        for a, st in enumerate(self.strategies):
            sec = {"kind": st.kind, "F": repr(st.F), "CR": repr(st.CR), "objective_index": str(st.objective_index)}
            if st.prune_k is not None:
                sec["prune_k"] = str(st.prune_k)
            cp[f"strategy.{a}"] = sec
        if self.novelty is not None:
            nv = self.novelty
            cp["novelty"] = {
                "k": str(nv.k),
                "n_min0": repr(nv.n_min0),
                "n_inc": repr(nv.n_inc),
                "n_dec": repr(nv.n_dec),
                "n_a": str(nv.n_a),
                "n_r": str(nv.n_r),
                "max_size": "" if nv.max_size is None else str(nv.max_size),
                "window": nv.window,
            }
        for m in self.im.matrices:
            rows = "; ".join(", ".join(repr(float(v)) for v in row) for row in m.entries)
            cp[f"im.{m.interaction}"] = {"entries": rows}
        buf = io.StringIO()
        cp.write(buf)
        return buf.getvalue()

    @classmethod
    def from_text(cls, text: str, resolve_problem: Callable[[str], Problem] | None = None) -> GsfConfig:
        cp = configparser.ConfigParser()
        cp.optionxform = str
        try:
            cp.read_string(text)
            g = cp["gsf"]
            resolve = resolve_problem or (lambda pid: instance_from_id(pid).problem())
            problem = resolve(g["problem"])
            ratios = tuple(float(v) for v in g["S"].split(","))
            strategies = []
            for a in range(len(ratios)):
                sec = cp[f"strategy.{a}"]
                pk = sec.get("prune_k")
                strategies.append(
                    Strategy(sec["kind"], float(sec["F"]), float(sec["CR"]), int(sec["objective_index"]), int(pk) if pk else None)
                )
            novelty = None
            if cp.has_section("novelty"):
                nv = cp["novelty"]
                novelty = NoveltyParams(
                    n_min0=float(nv["n_min0"]),
                    k=int(nv["k"]),
                    n_inc=float(nv["n_inc"]),
                    n_dec=float(nv["n_dec"]),
                    n_a=int(nv["n_a"]),
                    n_r=int(nv["n_r"]),
                    max_size=int(nv["max_size"]) if nv.get("max_size") else None,
                    window=nv.get("window", "adjustment"),
                )
            mats = []
            for name in cp.sections():
                if name.startswith("im."):
                    rows = [[float(v) for v in row.split(",")] for row in cp[name]["entries"].split(";")]
                    mats.append(InteractionMatrix(np.array(rows), int(name[3:])))
            return cls(
                strategies=tuple(strategies),
                sizes=SizeVector(ratios, int(g["total_size"])),
                im=InteractionMatrixSet(tuple(mats)),
                problem=problem,
                generations=int(g["generations"]),
                novelty=novelty,
                offer_rejected=g.getboolean("offer_rejected", True),
                max_evaluations=int(g["max_evaluations"]) if g.get("max_evaluations") else None,
                record_forces=g.getboolean("record_forces", True),
            )
        except (KeyError, configparser.Error) as exc:
            raise ConfigError(f"malformed configuration: {exc}") from exc


@dataclass
class RunResult:
    """Outcome of one framework run.

    ``final`` is the non-dominated set of the feasible members of all
    subpopulations together with every archive's non-dominated set, with
    exact duplicates removed. ``parent_sources[a, b]`` counts DE parents that
    subpopulation ``a`` drew from ``b``.
    """

    final: Population
    evaluations: int
    populations: list[Population]
    archives: dict[int, NoveltyArchive]
    parent_sources: np.ndarray
    forces: ForceHistogram | None = None
    subpop_forces: list[ForceHistogram] | None = None


def _conflicts(src: np.ndarray, idx: np.ndarray, acting: int) -> np.ndarray:
    """Rows whose three (subpop, member) parents are not distinct or include the target."""
    N = src.shape[0]
    self_idx = np.arange(N)[:, None]
    bad = np.any((src == acting) & (idx == self_idx), axis=1)
    for p, q in ((0, 1), (0, 2), (1, 2)):
        bad |= (src[:, p] == src[:, q]) & (idx[:, p] == idx[:, q])
    return bad


class _ParentRouter:
    """Draws DE parents across subpopulations according to interaction 1."""

    def __init__(self, pops: list[Population], counts: np.ndarray) -> None:
        self.pops = pops
        self.counts = counts
        self.im: InteractionMatrix | None = None

    def sampler(self, acting: int) -> ParentSampler:
        def draw(members: Population, rng: RngStream) -> np.ndarray:
            return self._draw(acting, members, rng)

        return draw

    def _draw(self, a: int, members: Population, rng: RngStream) -> np.ndarray:
        N = len(members)
        im = self.im
        hot = im.one_hot(a) if im is not None else a
        if hot == a:
            self.counts[a, a] += 3 * N
            return local_parents(members, rng)
        row = im.entries[a]
        if not row.any():
            raise DisabledInteractionError(f"parent sampling is disabled for subpopulation {a}")
        sizes = np.array([len(p) for p in self.pops])
        if np.any(sizes[row > 0] == 0):
            raise ConfigError("parent sampling routes to an empty subpopulation")

        def fresh(rows: int) -> tuple[np.ndarray, np.ndarray]:
            src = np.full((rows, 3), hot) if hot is not None else rng.choice(im.s, size=(rows, 3), p=row)
            idx = np.floor(rng.random((rows, 3)) * sizes[src]).astype(int)
            return src, idx

        src, idx = fresh(N)
        bad = _conflicts(src, idx, a)
        tries = 0
        while bad.any() and tries < _MAX_RESAMPLES:
            rows = np.flatnonzero(bad)
            src[rows], idx[rows] = fresh(rows.size)
            bad = _conflicts(src, idx, a)
            tries += 1
        if bad.any():
            # fall back to drawing without replacement inside the acting subpopulation
            if N < 4:
                raise ConfigError(f"subpopulation {a} is too small for local parent sampling")
            rows = np.flatnonzero(bad)
            keys = rng.random((rows.size, N))
            keys[np.arange(rows.size), rows] = np.inf
            pick = np.argsort(keys, axis=1)[:, :3]
            src[rows] = a
            idx[rows] = pick
        self.counts[a] += np.bincount(src.ravel(), minlength=self.counts.shape[1])
        offsets = np.concatenate([[0], np.cumsum(sizes)[:-1]])
        allX = np.vstack([p.X for p in self.pops])
        return allX[offsets[src] + idx].transpose(1, 0, 2)


def _offer_targets(im: InteractionMatrix | None, a: int, count: int, rng: RngStream) -> np.ndarray | None:
    if im is None or count == 0 or not im.entries[a].any():
        return None
    hot = im.one_hot(a)
    if hot is not None:
        return np.full(count, hot)
    return rng.choice(im.s, size=count, p=im.entries[a])


def _dedupe(pop: Population) -> Population:
    if len(pop) == 0:
        return pop
    _, first = np.unique(np.hstack([pop.X, pop.F]), axis=0, return_index=True)
    return pop.take(np.sort(first))


def merged_front(pops: Sequence[Population], archives: Mapping[int, NoveltyArchive], n: int, M: int) -> Population:
    union = Population.empty(n, M)
    for p in pops:
        union = union.concat(p.take(np.flatnonzero(p.feasible)))
    for arch in archives.values():
        if len(arch):
            union = union.concat(arch.nondominated())
    union = _dedupe(union)
    if len(union) == 0:
        return union
    return union.take(np.flatnonzero(nondominated_mask(union.F)))


def run_gsf(config: GsfConfig, rng: RngStream) -> RunResult:
    """Run ``config.generations`` synchronous generations.

    Subpopulations step in index order; each step sees the current state of
    the subpopulations stepped before it. Created solutions are routed to
    archives right after their subpopulation's step, in member order.
    """
    problem = config.problem
    s = config.s
    sizes = config.sizes.sizes()
    pops: list[Population] = []
    for a in range(s):
        pops.append(Population.evaluate(problem, problem.random_uniform(sizes[a], rng.child("init", a))))
    evaluations = sum(sizes)
    step_rng = [rng.child("step", a) for a in range(s)]
    offer_rng = [rng.child("offer", a) for a in range(s)]
    archives = {
        a: NoveltyArchive(config.novelty, problem.n, problem.M) for a, st in enumerate(config.strategies) if st.kind == "mona"
    }
    counts = np.zeros((s, s), dtype=np.int64)
    router = _ParentRouter(pops, counts)
    forces_on = config.record_forces and problem.M == 2
    total_hist = ForceHistogram() if forces_on else None
    sub_hist = [ForceHistogram() for _ in range(s)] if forces_on else None

    def route(a: int, cand: Population, im_set: InteractionMatrixSet, generation: int) -> None:
        cand = cand.take(np.flatnonzero(cand.feasible))
        if config.strategies[a].kind == "mona":
            # a MONA subpopulation always feeds its own archive
            archives[a].offer_batch(cand.X, cand.F, generation)
            return
        targets = _offer_targets(im_set.get(ARCHIVE_OFFER), a, len(cand), offer_rng[a])
        if targets is None:
            return
        for b in np.unique(targets):
            if int(b) in archives:
                sel = np.flatnonzero(targets == b)
                archives[int(b)].offer_batch(cand.X[sel], cand.F[sel], generation)

    for a in range(s):
        route(a, pops[a], config.im, 0)

    for g in range(1, config.generations + 1):
        im_set = config.im_supplier(g) if config.im_supplier is not None else config.im
        router.im = im_set.get(PARENT_SAMPLING)
        for a, st in enumerate(config.strategies):
            N = len(pops[a])
            if config.max_evaluations is not None and evaluations + N > config.max_evaluations:
                raise BudgetError(f"evaluation budget {config.max_evaluations} exhausted at generation {g}")
            sampler = router.sampler(a)
            if st.kind == "de":
                nxt, rep = de_generation_step(pops[a], st.de_params, sampler, problem, step_rng[a])
            elif st.kind == "gde3":
                prune = PruneParams(st.prune_k or problem.M, N)
                nxt, rep = gde3_generation_step(pops[a], st.de_params, prune, sampler, problem, step_rng[a])
            else:
                nxt, rep = mona_generation_step(pops[a], st.de_params, archives[a], sampler, problem, step_rng[a], g)
            pops[a] = nxt
            evaluations += N
            if forces_on:
                sub_hist[a].record_batch(rep.target_F, rep.trials.F, rep.trials.feasible)
            if st.kind != "mona":
                cand = rep.trials if config.offer_rejected else rep.trials.take(np.flatnonzero(rep.accepted))
                route(a, cand, im_set, g)

    if forces_on:
        for h in sub_hist:
            total_hist = total_hist.merge(h)
    final = merged_front(pops, archives, problem.n, problem.M)
    return RunResult(final, evaluations, pops, archives, counts, total_hist, sub_hist)


def _default_de_ratio(name: str, M: int) -> float:
    if M == 2:
        return 0.3 if name == "SAN" else 0.1
    return 0.1


def preset(
    name: str,
    M: int,
    params: Mapping[str, object] | None = None,
    *,
    problem: Problem | None = None,
    generations: int = 2000,
    total_size: int = 100,
) -> GsfConfig:
    """Named composition with the published parameter settings.

    ``params`` overrides any of ``CR``, ``F``, ``S``, ``n_inc``, ``n_dec``,
    ``n_a``, ``n_r``, ``k`` (novelty neighbors), ``n_min0``, ``prune_k``,
    ``max_size``. Without ``problem`` the instance WFG1 with ``M`` objectives
    is used.
    """
    from .wfg import WfgInstance

    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")
    if M < 1:
        raise ConfigError("M must be at least 1")
    p = dict(params or {})
    unknown = set(p) - {"CR", "F", "S", "n_inc", "n_dec", "n_a", "n_r", "k", "n_min0", "prune_k", "max_size", "window"}
    if unknown:
        raise ConfigError(f"unknown preset parameters: {sorted(unknown)}")
    wfg = WfgInstance(1, M) if problem is None else None
    if problem is None:
        problem = wfg.problem()
    if problem.M != M:
        raise ConfigError(f"problem has {problem.M} objectives, preset asked for {M}")

    default_F = 0.5 if name == "GDE3" else (0.5 if name == "DE_per_objective" else 0.1)
    default_CR = 0.6 if name == "DE_per_objective" else 0.1
    F = float(p.get("F", default_F))
    CR = float(p.get("CR", default_CR))
    prune_k = p.get("prune_k")
    prune_k = int(prune_k) if prune_k is not None else None

    novelty = None
    if name in ("SAN", "MONA"):
        if "n_min0" in p:
            n_min0 = float(p["n_min0"])
        else:
            upper = wfg.objective_upper if wfg is not None else _objective_upper(problem)
            n_min0 = default_n_min0(upper)
        novelty = NoveltyParams(
            n_min0=n_min0,
            k=int(p.get("k", 15)),
            n_inc=float(p.get("n_inc", 1.1)),
            n_dec=float(p.get("n_dec", 0.999)),
            n_a=int(p.get("n_a", 1)),
            n_r=int(p.get("n_r", 50000)),
            max_size=int(p["max_size"]) if p.get("max_size") is not None else None,
            window=str(p.get("window", "adjustment")),
        )

    des = tuple(Strategy("de", F, CR, m) for m in range(M))
    if name in ("GDE3", "MONA"):
        strategies = (Strategy("gde3" if name == "GDE3" else "mona", F, CR, 0, prune_k),)
        ratios: tuple[float, ...] = (1.0,)
        im = InteractionMatrixSet()
    elif name == "DE_per_objective":
        strategies = des
        ratios = tuple([1.0 / M] * M)
        im = InteractionMatrixSet((InteractionMatrix(np.eye(M)),))
    else:
        last = Strategy("mona" if name == "SAN" else "gde3", F, CR, 0, prune_k)
        strategies = des + (last,)
        r = _default_de_ratio(name, M)
        if M * r >= 1.0 and "S" not in p:
            raise ConfigError(f"no default size vector for {name} with M={M}; pass S")
        ratios = tuple([r] * M + [round(1.0 - M * r, 12)])
        s = M + 1
        mats = [uniform_im(s)]
        if name == "SAN":
            mats.append(archive_offer_im(s, M))
        im = InteractionMatrixSet(tuple(mats))
    if "S" in p:
        ratios = tuple(float(v) for v in p["S"])  # type: ignore[union-attr]
    return GsfConfig(
        strategies=strategies,
        sizes=SizeVector(ratios, total_size),
        im=im,
        problem=problem,
        generations=generations,
        novelty=novelty,
    )


def _objective_upper(problem: Problem) -> np.ndarray:
    try:
        return instance_from_id(problem.id).objective_upper
    except ValueError:
        raise ConfigError(f"cannot derive n_min0 for problem {problem.id!r}; pass n_min0 explicitly") from None


def with_generations(config: GsfConfig, generations: int) -> GsfConfig:
    return replace(config, generations=generations)


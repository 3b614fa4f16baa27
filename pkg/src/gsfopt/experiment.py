"""Multi-run experiments: plans, execution, indicator files and statistics.

Result tree for an output directory ``out``::

    out/manifest.ini                      plan plus tool version
    out/summary.txt                       one row per (problem, algorithm)
    out/reference/<problem id>.txt        sampled optimal front
    out/<problem>/<algorithm>/run_NNN/    solutions.txt, indicators.txt,
                                          forces*.txt (M=2), .complete
    out/<problem>/mann_whitney.txt        pairwise one-sided p-values
    out/<problem>/attainment50.txt        50% surfaces (M=2)
"""

from __future__ import annotations

import configparser
import io
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import __version__
from .assess import (
    MC_SAMPLES,
    ReferenceData,
    attainment_surface_50,
    epsilon_indicator,
    hypervolume,
    hypervolume_indicator,
    mann_whitney,
    summarize,
)
from .core import RngStream
from .forces import ForceHistogram
from .gsf import PRESETS, ConfigError, GsfConfig, preset, run_gsf
from .wfg import WfgInstance, parse_problem, wfg_front_samples

log = logging.getLogger(__name__)

PROFILES = {"desk": (10, 2000, 100), "paper": (30, 25000, 100)}
COMPLETE_MARKER = ".complete"

# plan keys that map onto preset parameters, named as in the published tables
_PARAM_KEYS = ("CR", "F", "S", "n_inc", "n_dec", "n_a", "n_r", "k", "n_min0", "prune_k", "max_size", "window")


@dataclass(frozen=True)
class AlgorithmSpec:
    name: str
    preset: str
    params: tuple[tuple[str, str], ...] = ()

    def __post_init__(self) -> None:
        if self.preset not in PRESETS:
            raise ConfigError(f"unknown preset {self.preset!r} for algorithm {self.name!r}")
        for key, _ in self.params:
            if key not in _PARAM_KEYS:
                raise ConfigError(f"unknown parameter {key!r} for algorithm {self.name!r}")

    def preset_params(self) -> dict[str, object]:
        out: dict[str, object] = {}
        for key, raw in self.params:
            if key == "S":
                out[key] = tuple(float(v) for v in raw.split(","))
            elif key == "window":
                out[key] = raw
            elif key in ("n_a", "n_r", "k", "prune_k", "max_size"):
                out[key] = int(raw)
            else:
                out[key] = float(raw)
        return out


@dataclass(frozen=True)
class ExperimentPlan:
    problems: tuple[str, ...]
    algorithms: tuple[AlgorithmSpec, ...]
    runs: int
    generations: int
    total_size: int
    out: str
    seed: int
    profile: str = "desk"
    M: int = 2
    k: int = 4
    l: int = 20
    reference_size: int = 10000
    hv_samples: int = MC_SAMPLES
    extra: tuple[tuple[str, str], ...] = field(default=(), compare=False)

    def __post_init__(self) -> None:
        if self.profile not in PROFILES:
            raise ConfigError(f"unknown profile {self.profile!r}")
        if self.runs < 1 or self.generations < 1 or self.total_size < 1:
            raise ConfigError("runs, generations and total_size must be positive")
        if self.profile == "paper" and (self.runs, self.generations, self.total_size) != PROFILES["paper"]:
            raise ConfigError("the paper profile fixes runs=30, generations=25000, total_size=100")
        if not self.problems or not self.algorithms:
            raise ConfigError("a plan needs at least one problem and one algorithm")
        if len({a.name for a in self.algorithms}) != len(self.algorithms):
            raise ConfigError("algorithm names must be unique")
        for p in self.problems:
            try:
                self.instance(p)
            except ValueError as exc:
                raise ConfigError(str(exc)) from exc
        for a in self.algorithms:
            self.config(a, self.problems[0])

    def with_profile(self, profile: str) -> ExperimentPlan:
        runs, gens, size = PROFILES[profile] if profile in PROFILES else (0, 0, 0)
        return replace(self, profile=profile, runs=runs, generations=gens, total_size=size)

    def instance(self, problem: str) -> WfgInstance:
        return parse_problem(problem, self.M, self.k, self.l)

    def config(self, algorithm: AlgorithmSpec, problem: str) -> GsfConfig:
        try:
            return preset(
                algorithm.preset,
                self.M,
                algorithm.preset_params(),
                problem=self.instance(problem).problem(),
                generations=self.generations,
                total_size=self.total_size,
            )
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(f"algorithm {algorithm.name!r}: {exc}") from exc

    def to_text(self) -> str:
        cp = configparser.ConfigParser()
        cp.optionxform = str
        cp["experiment"] = {
            "problems": ", ".join(self.problems),
            "M": str(self.M),
            "k": str(self.k),
            "l": str(self.l),
            "runs": str(self.runs),
            "generations": str(self.generations),
            "total_size": str(self.total_size),
            "seed": str(self.seed),
            "profile": self.profile,
            "out": self.out,
            "reference_size": str(self.reference_size),
            "hv_samples": str(self.hv_samples),
        }
        for a in self.algorithms:
            sec = {"preset": a.preset}
            sec.update(dict(a.params))
            cp[f"algorithm.{a.name}"] = sec
        if self.extra:
            cp["manifest"] = dict(self.extra)
        buf = io.StringIO()
        cp.write(buf)
        return buf.getvalue()

    @classmethod
    def from_text(cls, text: str) -> ExperimentPlan:
        cp = configparser.ConfigParser()
        cp.optionxform = str
        try:
            cp.read_string(text)
            e = cp["experiment"]
            algorithms = []
            for name in cp.sections():
                if not name.startswith("algorithm."):
                    continue
                sec = dict(cp[name])
                label = name[len("algorithm.") :]
                kind = sec.pop("preset", label)
                im = sec.pop("IM", None)
                if im is not None and im.strip().lower() not in ("uniform", "none"):
                    raise ConfigError(f"algorithm {label!r}: only IM = uniform is supported")
                algorithms.append(AlgorithmSpec(label, kind, tuple(sorted(sec.items()))))
            profile = e.get("profile", "desk")
            defaults = PROFILES.get(profile, PROFILES["desk"])
            return cls(
                problems=tuple(p.strip() for p in e["problems"].split(",") if p.strip()),
                algorithms=tuple(algorithms),
                runs=int(e.get("runs", defaults[0])),
                generations=int(e.get("generations", defaults[1])),
                total_size=int(e.get("total_size", defaults[2])),
                out=e.get("out", "results"),
                seed=int(e.get("seed", "0")),
                profile=profile,
                M=int(e.get("M", "2")),
                k=int(e.get("k", "4")),
                l=int(e.get("l", "20")),
                reference_size=int(e.get("reference_size", "10000")),
                hv_samples=int(e.get("hv_samples", str(MC_SAMPLES))),
                extra=tuple(sorted(cp["manifest"].items())) if cp.has_section("manifest") else (),
            )
        except (KeyError, configparser.Error) as exc:
            raise ConfigError(f"malformed plan: {exc}") from exc
        except ValueError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"malformed plan: {exc}") from exc

    @classmethod
    def load(cls, path: str | Path) -> ExperimentPlan:
        return cls.from_text(Path(path).read_text())


def write_solution_set(path: Path, header: str, X: np.ndarray, F: np.ndarray) -> None:
    with open(path, "w") as fh:
        fh.write(f"# {header}\n")
        if len(X):
            np.savetxt(fh, np.hstack([X, F]), fmt="%.17g")


def read_solution_set(path: str | Path) -> tuple[dict[str, str], np.ndarray]:
    """Header fields and the raw rows (x then f) of a solution set file."""
    lines = Path(path).read_text().splitlines()
    header: dict[str, str] = {}
    if lines and lines[0].startswith("#"):
        for item in lines[0][1:].split():
            if "=" in item:
                key, value = item.split("=", 1)
                header[key] = value
    rows = [list(map(float, ln.split())) for ln in lines if ln.strip() and not ln.startswith("#")]
    return header, np.array(rows) if rows else np.empty((0, 0))


def read_objectives(path: str | Path) -> np.ndarray:
    """Objective vectors of a solution set file, or of a plain front file."""
    header, rows = read_solution_set(path)
    if rows.size == 0:
        M = int(header.get("M", "2"))
        return np.empty((0, M))
    if "M" in header:
        return rows[:, -int(header["M"]) :]
    return rows


def _read_indicators(path: Path) -> dict[str, float]:
    out = {}
    for line in path.read_text().splitlines():
        key, value = line.split()
        out[key] = float(value)
    return out


@dataclass(frozen=True)
class _Job:
    plan_text: str
    problem: str
    algorithm: str
    run: int
    front_hv: float


def _run_job(job: _Job) -> tuple[str, str, int, dict[str, float], np.ndarray]:
    plan = ExperimentPlan.from_text(job.plan_text)
    algo = next(a for a in plan.algorithms if a.name == job.algorithm)
    inst = plan.instance(job.problem)
    out = Path(plan.out)
    run_dir = out / job.problem / job.algorithm / f"run_{job.run:03d}"
    if (run_dir / COMPLETE_MARKER).exists():
        ind = _read_indicators(run_dir / "indicators.txt")
        return job.problem, job.algorithm, job.run, ind, read_objectives(run_dir / "solutions.txt")

    cfg = plan.config(algo, job.problem)
    rng = RngStream(plan.seed, inst.id, job.algorithm, job.run)
    result = run_gsf(cfg, rng)
    F = result.final.F
    ref = ReferenceData.from_front(np.loadtxt(out / "reference" / f"{inst.id}.txt", ndmin=2))
    hv_rng = RngStream(plan.seed, inst.id, "hypervolume", job.run)
    ind = {
        "epsilon": epsilon_indicator(F, ref.front),
        "epsilon_additive": epsilon_indicator(F, ref.front, additive=True),
        "hypervolume": hypervolume_indicator(F, ref, plan.hv_samples, hv_rng, front_hv=job.front_hv),
        "evaluations": float(result.evaluations),
    }
    run_dir.mkdir(parents=True, exist_ok=True)
    header = (
        f"problem={inst.id} M={inst.M} n={inst.n} seed={plan.seed} "
        f"algorithm={job.algorithm} run={job.run}"
    )
    write_solution_set(run_dir / "solutions.txt", header, result.final.X, F)
    (run_dir / "indicators.txt").write_text("".join(f"{k} {v!r}\n" for k, v in ind.items()))
    if result.forces is not None:
        result.forces.write(run_dir / "forces.txt")
        for a, h in enumerate(result.subpop_forces):
            h.write(run_dir / f"forces_sub{a}.txt")
    (run_dir / COMPLETE_MARKER).write_text(f"{__version__}\n")
    return job.problem, job.algorithm, job.run, ind, F


def _reference(plan: ExperimentPlan, problem: str) -> tuple[ReferenceData, float]:
    inst = plan.instance(problem)
    path = Path(plan.out) / "reference" / f"{inst.id}.txt"
    if path.exists():
        front = np.loadtxt(path, ndmin=2)
    else:
        front = wfg_front_samples(inst, plan.reference_size, RngStream(plan.seed, inst.id, "reference"))
        path.parent.mkdir(parents=True, exist_ok=True)
        np.savetxt(path, front, fmt="%.17g")
    ref = ReferenceData.from_front(front)
    front_hv = hypervolume(ref.front, ref.nadir, plan.hv_samples, RngStream(plan.seed, inst.id, "hypervolume", "front"))
    return ref, front_hv


def write_problem_tables(out: Path, problem: str, results: dict[str, dict[int, tuple[dict[str, float], np.ndarray]]]) -> None:
    """Pairwise Mann-Whitney table and, for two objectives, the 50% attainment surfaces."""
    pdir = out / problem
    pdir.mkdir(parents=True, exist_ok=True)
    names = list(results)
    lines = ["# algorithm_a algorithm_b p_epsilon p_hypervolume  (H1: a has smaller indicator values)"]
    for a in names:
        for b in names:
            if a == b:
                continue
            ea = [v[0]["epsilon"] for v in results[a].values()]
            eb = [v[0]["epsilon"] for v in results[b].values()]
            ha = [v[0]["hypervolume"] for v in results[a].values()]
            hb = [v[0]["hypervolume"] for v in results[b].values()]
            if min(len(ea), len(eb)) < 2:
                pe = ph = float("nan")
            else:
                pe, ph = mann_whitney(ea, eb), mann_whitney(ha, hb)
            lines.append(f"{a} {b} {pe:.6g} {ph:.6g}")
    (pdir / "mann_whitney.txt").write_text("\n".join(lines) + "\n")
    any_set = next(iter(next(iter(results.values())).values()))[1]
    if any_set.shape[1] == 2:
        rows = ["# algorithm f1 f2"]
        for name in names:
            sets = [v[1] for _, v in sorted(results[name].items())]
            if len(sets) >= 2:
                for x, y in attainment_surface_50(sets):
                    rows.append(f"{name} {x:.17g} {y:.17g}")
        (pdir / "attainment50.txt").write_text("\n".join(rows) + "\n")


def write_summary(path: Path, results: dict[str, dict[str, dict[int, tuple[dict[str, float], np.ndarray]]]]) -> None:
    lines = ["# problem algorithm runs eps_mean eps_sd eps_best hv_mean hv_sd hv_best"]
    for problem, per_alg in results.items():
        eps = summarize({a: [v[0]["epsilon"] for v in runs.values()] for a, runs in per_alg.items()})
        hv = summarize({a: [v[0]["hypervolume"] for v in runs.values()] for a, runs in per_alg.items()})
        for a in per_alg:
            e, h = eps[a], hv[a]
            lines.append(
                f"{problem} {a} {e.n} {e.mean:.6g} {e.sd:.6g} {int(e.best)} {h.mean:.6g} {h.sd:.6g} {int(h.best)}"
            )
    path.write_text("\n".join(lines) + "\n")


def run_experiment(plan: ExperimentPlan, workers: int = 1) -> Path:
    """Execute every (problem, algorithm, run) of ``plan`` and write the result tree.

    Completed runs found on disk are reused, never rewritten.
    """
    out = Path(plan.out)
    out.mkdir(parents=True, exist_ok=True)
    manifest = replace(plan, extra=(("version", __version__),))
    (out / "manifest.ini").write_text(manifest.to_text())
    text = plan.to_text()
    jobs = []
    for problem in plan.problems:
        _, front_hv = _reference(plan, problem)
        for algo in plan.algorithms:
            for r in range(plan.runs):
                jobs.append(_Job(text, problem, algo.name, r, front_hv))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_run_job, jobs))
    else:
        outcomes = [_run_job(j) for j in jobs]
    results: dict[str, dict[str, dict[int, tuple[dict[str, float], np.ndarray]]]] = {}
    for problem, algo, run, ind, F in outcomes:
        results.setdefault(problem, {}).setdefault(algo, {})[run] = (ind, F)
    for problem, per_alg in results.items():
        write_problem_tables(out, problem, per_alg)
    write_summary(out / "summary.txt", results)
    log.info("experiment finished: %d runs in %s", len(jobs), out)
    return out


def collect_results(dirs: list[str | Path]) -> dict[str, dict[str, dict[int, tuple[dict[str, float], np.ndarray]]]]:
    """Load completed runs from one or more result trees."""
    results: dict[str, dict[str, dict[int, tuple[dict[str, float], np.ndarray]]]] = {}
    for d in dirs:
        for marker in sorted(Path(d).glob(f"*/*/run_*/{COMPLETE_MARKER}")):
            run_dir = marker.parent
            algo = run_dir.parent.name
            problem = run_dir.parent.parent.name
            run = int(run_dir.name.split("_")[1])
            ind = _read_indicators(run_dir / "indicators.txt")
            F = read_objectives(run_dir / "solutions.txt")
            results.setdefault(problem, {}).setdefault(algo, {})[run] = (ind, F)
    return results


def collect_forces(dir_: str | Path) -> dict[tuple[str, str], ForceHistogram]:
    merged: dict[tuple[str, str], ForceHistogram] = {}
    for path in sorted(Path(dir_).glob("*/*/run_*/forces.txt")):
        key = (path.parent.parent.parent.name, path.parent.parent.name)
        h = ForceHistogram.from_text(path.read_text())
        merged[key] = merged[key].merge(h) if key in merged else h
    return merged


def default_workers() -> int:
    return max(1, os.cpu_count() or 1)

"""Command-line entry point: ``gsfopt {run,compare,indicators,front,forces}``.

Exit codes: 0 success, 2 configuration error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .assess import ReferenceData, epsilon_indicator, hypervolume_indicator, mann_whitney, summarize
from .core import RngStream
from .experiment import (
    PROFILES,
    ExperimentPlan,
    collect_forces,
    collect_results,
    read_objectives,
    run_experiment,
)
from .forces import exclusion_report
from .gsf import ConfigError
from .wfg import instance_from_id, parse_problem, wfg_front_samples

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_run(args: argparse.Namespace) -> int:
    plan = ExperimentPlan.load(args.plan)
    if args.profile:
        plan = plan.with_profile(args.profile)
    if args.seed is not None:
        plan = replace(plan, seed=args.seed)
    if args.out:
        plan = replace(plan, out=args.out)
    out = run_experiment(plan, workers=args.workers)
    sys.stdout.write((out / "summary.txt").read_text())
    return EXIT_OK


def cmd_compare(args: argparse.Namespace) -> int:
    results = collect_results(args.dirs)
    if not results:
        raise ConfigError("no completed runs found")
    lines = []
    for problem, per_alg in sorted(results.items()):
        eps = summarize({a: [v[0]["epsilon"] for v in r.values()] for a, r in per_alg.items()})
        hv = summarize({a: [v[0]["hypervolume"] for v in r.values()] for a, r in per_alg.items()})
        lines.append(f"== {problem}")
        lines.append("algorithm runs eps_mean(sd) hv_mean(sd)")
        for a in sorted(per_alg):
            e, h = eps[a], hv[a]
            mark_e = "*" if e.best else ""
            mark_h = "*" if h.best else ""
            lines.append(f"{a} {e.n} {e.mean:.4g}({e.sd:.2g}){mark_e} {h.mean:.4g}({h.sd:.2g}){mark_h}")
        names = sorted(per_alg)
        for a in names:
            for b in names:
                if a == b:
                    continue
                ea = [v[0]["epsilon"] for v in per_alg[a].values()]
                eb = [v[0]["epsilon"] for v in per_alg[b].values()]
                if min(len(ea), len(eb)) >= 2:
                    lines.append(f"p(eps {a} < {b}) = {mann_whitney(ea, eb):.4g}")
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def cmd_indicators(args: argparse.Namespace) -> int:
    F = read_objectives(args.solutions)
    front = np.loadtxt(args.reference, ndmin=2, comments="#")
    ref = ReferenceData.from_front(front)
    rng = RngStream(args.seed or 0, "indicators")
    text = (
        f"epsilon {epsilon_indicator(F, ref.front)!r}\n"
        f"epsilon_additive {epsilon_indicator(F, ref.front, additive=True)!r}\n"
        f"hypervolume {hypervolume_indicator(F, ref, rng=rng)!r}\n"
    )
    _emit(text, args.out)
    return EXIT_OK


def cmd_front(args: argparse.Namespace) -> int:
    try:
        inst = instance_from_id(args.problem)
    except ValueError:
        inst = parse_problem(args.problem, args.objectives)
    front = wfg_front_samples(inst, args.count, RngStream(args.seed or 0, inst.id, "reference"))
    if args.out:
        np.savetxt(args.out, front, fmt="%.17g")
    else:
        np.savetxt(sys.stdout, front, fmt="%.17g")
    return EXIT_OK


def cmd_forces(args: argparse.Namespace) -> int:
    merged = collect_forces(args.dir)
    if not merged:
        raise ConfigError(f"no force histograms under {args.dir}")
    lines = ["# problem algorithm total unfeasible_pct zero_modulus_pct q1 q2 q3 q4"]
    for (problem, algo), h in sorted(merged.items()):
        u, z = exclusion_report(h)
        q = " ".join(f"{v:.4f}" for v in h.quadrant_shares())
        lines.append(f"{problem} {algo} {h.total_offered} {u:.2f} {z:.2f} {q}")
        if args.out:
            Path(args.out).mkdir(parents=True, exist_ok=True)
            h.write(Path(args.out) / f"{problem}_{algo}_forces.txt")
    sys.stdout.write("\n".join(lines) + "\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gsfopt", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="base seed override")
    common.add_argument("--workers", type=int, default=1, help="parallel run workers")
    common.add_argument("--profile", choices=sorted(PROFILES), default=None)
    common.add_argument("--out", default=None, help="output directory or file")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", parents=[common], help="execute an experiment plan or manifest")
    p.add_argument("plan")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("compare", parents=[common], help="summaries and tests across result trees")
    p.add_argument("dirs", nargs="+")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("indicators", parents=[common], help="indicators of one solution set")
    p.add_argument("solutions")
    p.add_argument("reference")
    p.set_defaults(func=cmd_indicators)

    p = sub.add_parser("front", parents=[common], help="sample an optimal front")
    p.add_argument("problem", help="WFG name (e.g. WFG4) or full id (WFG4-M2-k4-l20)")
    p.add_argument("count", type=int)
    p.add_argument("--objectives", "-M", type=int, default=2)
    p.set_defaults(func=cmd_front)

    p = sub.add_parser("forces", parents=[common], help="aggregate force histograms")
    p.add_argument("dir")
    p.set_defaults(func=cmd_forces)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())

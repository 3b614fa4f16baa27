"""Generate WFG golden files from an independent reference implementation.

Uses the ``optproblems`` package (a port of the original WFG C++ toolkit).
Its ``multiobjective`` module imports ``diversipy`` at module level, which is
not needed for evaluation, so missing submodules are stubbed.

    python scripts/make_wfg_golden.py tests/data/wfg
"""

import sys
import types
from pathlib import Path

import numpy as np

try:
    import diversipy  # noqa: F401
except ImportError:
    for name in ("diversipy", "diversipy.subset", "diversipy.indicator"):
        sys.modules[name] = types.ModuleType(name)
    sys.modules["diversipy"].subset = sys.modules["diversipy.subset"]

import optproblems.wfg as reference

K, L, COUNT, SEED = 4, 20, 100, 20240601


def main(out_dir: str) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(SEED)
    upper = 2.0 * np.arange(1, K + L + 1)
    for M in (2, 5):
        for index in range(1, 10):
            problem = getattr(reference, f"WFG{index}")(M, K + L, K)
            Z = rng.random((COUNT, K + L)) * upper
            with open(out / f"WFG{index}_M{M}.txt", "w") as fh:
                for z in Z:
                    f = problem.objective_function(list(z))
                    fh.write(" ".join(f"{v:.17g}" for v in [*z, *f]) + "\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "tests/data/wfg")

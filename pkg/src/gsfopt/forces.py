"""Force diagnostics: angle histograms of parent-to-offspring moves in objective space.

A force is the vector from a DE target parent to its trial, taken before
selection. Angles are measured from the +f1 axis, so 180 degrees means a pure
improvement of objective 1 and 270 degrees a pure improvement of objective 2.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .core import DimensionError, Solution

N_BINS = 36
BIN_WIDTH = 360.0 / N_BINS


class EmptyHistogramError(ValueError):
    """Raised when a report is requested for a histogram with no offers."""


@dataclass
class ForceHistogram:
    bins: np.ndarray = field(default_factory=lambda: np.zeros(N_BINS, dtype=np.int64))
    unfeasible_excluded: int = 0
    zero_modulus_excluded: int = 0
    total_offered: int = 0

    def record_batch(self, parent_F: np.ndarray, offspring_F: np.ndarray, offspring_feasible: np.ndarray) -> None:
        parent_F = np.atleast_2d(np.asarray(parent_F, dtype=float))
        offspring_F = np.atleast_2d(np.asarray(offspring_F, dtype=float))
        if parent_F.shape != offspring_F.shape or parent_F.shape[1] != 2:
            raise DimensionError("forces are defined for bi-objective vectors only")
        feas = np.asarray(offspring_feasible, dtype=bool)
        d = offspring_F[feas] - parent_F[feas]
        zero = np.all(d == 0.0, axis=1)
        d = d[~zero]
        self.bins += np.bincount(angle_bins(d[:, 0], d[:, 1]), minlength=N_BINS)
        self.unfeasible_excluded += int((~feas).sum())
        self.zero_modulus_excluded += int(zero.sum())
        self.total_offered += len(feas)

    def merge(self, other: ForceHistogram) -> ForceHistogram:
        return ForceHistogram(
            self.bins + other.bins,
            self.unfeasible_excluded + other.unfeasible_excluded,
            self.zero_modulus_excluded + other.zero_modulus_excluded,
            self.total_offered + other.total_offered,
        )

    def is_conserved(self) -> bool:
        return int(self.bins.sum()) + self.unfeasible_excluded + self.zero_modulus_excluded == self.total_offered

    def quadrant_shares(self) -> np.ndarray:
        """Share of binned forces in each 90 degree quadrant, starting at 0 degrees."""
        q = self.bins.reshape(4, N_BINS // 4).sum(axis=1)
        total = q.sum()
        return q / total if total else np.zeros(4)

    def to_text(self) -> str:
        lines = [f"{i * BIN_WIDTH:g} {int(c)}" for i, c in enumerate(self.bins)]
        lines.append(
            f"# total_offered={self.total_offered} unfeasible_excluded={self.unfeasible_excluded} "
            f"zero_modulus_excluded={self.zero_modulus_excluded}"
        )
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> ForceHistogram:
        bins = np.zeros(N_BINS, dtype=np.int64)
        counters: dict[str, int] = {}
        rows = 0
        for line in text.splitlines():
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                for item in line[1:].split():
                    key, value = item.split("=")
                    counters[key] = int(value)
                continue
            start, count = line.split()
            bins[int(round(float(start) / BIN_WIDTH))] = int(count)
            rows += 1
        if rows != N_BINS:
            raise ValueError(f"expected {N_BINS} histogram rows, found {rows}")
        return cls(bins, counters["unfeasible_excluded"], counters["zero_modulus_excluded"], counters["total_offered"])

    def write(self, path: str | Path) -> None:
        Path(path).write_text(self.to_text())


def angle_bins(d1: np.ndarray, d2: np.ndarray) -> np.ndarray:
    deg = np.mod(np.degrees(np.arctan2(d2, d1)), 360.0)
    return np.floor(deg / BIN_WIDTH).astype(int) % N_BINS


def record_force(hist: ForceHistogram, parent: Solution, offspring: Solution) -> ForceHistogram:
    pf = parent.require_evaluated()
    of = offspring.require_evaluated()
    if pf.shape != (2,) or of.shape != (2,):
        raise DimensionError("forces are defined for bi-objective vectors only")
    hist.record_batch(pf[None, :], of[None, :], np.array([offspring.feasible]))
    return hist


def exclusion_report(hist: ForceHistogram) -> tuple[float, float]:
    """Percentages of unfeasible and zero-modulus forces among all offered."""
    if hist.total_offered == 0:
        raise EmptyHistogramError("no forces have been offered")
    total = hist.total_offered
    return 100.0 * hist.unfeasible_excluded / total, 100.0 * hist.zero_modulus_excluded / total

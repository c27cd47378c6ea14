"""Per-run tables, aggregate means and max-vigilance summaries for GA searches."""

from __future__ import annotations

import csv
import json
import os
from dataclasses import asdict, dataclass
from typing import List

import numpy as np

from .ga import SearchResult


@dataclass(frozen=True)
class RunRow:
    run: int
    vigilance: float
    tolerances: List[float]
    K: int
    modal_K: int
    error_rate: float
    cs: float
    fitness: float
    epochs: int
    converged: bool


@dataclass(frozen=True)
class RunReport:
    variant: str
    rows: List[RunRow]

    @classmethod
    def from_result(cls, result: SearchResult) -> "RunReport":
        rows = []
        for r in result.runs:
            b = r.best
            out = b.outcome
            rows.append(RunRow(
                r.run,
                float(b.chromosome.vigilance),
                [float(t) for t in b.chromosome.coefg],
                int(b.report.K),
                r.modal_k,
                float(b.report.error_rate),
                float(b.report.cs),
                float(b.report.fitness),
                int(out.epochs_run) if out is not None else 0,
                bool(out.converged) if out is not None else False,
            ))
        return cls(result.variant, rows)

    def aggregate(self) -> dict:
        """Means over runs of vigilance, each tolerance, error rate and K."""
        return {
            "vigilance": float(np.mean([r.vigilance for r in self.rows])),
            "tolerances": np.mean([r.tolerances for r in self.rows], axis=0).tolist(),
            "error_rate": float(np.mean([r.error_rate for r in self.rows])),
            "K": float(np.mean([r.K for r in self.rows])),
        }

    def max_vigilance(self) -> RunRow:
        """Best run among those reaching the highest vigilance."""
        top = max(r.vigilance for r in self.rows)
        cands = [r for r in self.rows if r.vigilance == top]
        return min(cands, key=lambda r: (-r.fitness, r.error_rate, r.K, r.run))

    def write(self, directory, prefix=None) -> List[str]:
        """Write ``<prefix>_runs.csv`` and ``<prefix>_summary.json``; return the paths."""
        os.makedirs(directory, exist_ok=True)
        prefix = prefix or self.variant
        runs_path = os.path.join(directory, f"{prefix}_runs.csv")
        d = len(self.rows[0].tolerances)
        with open(runs_path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["run", "vigilance"] + [f"tol{i + 1}" for i in range(d)]
                       + ["K", "modal_K", "error_rate", "cs", "fitness", "epochs", "converged"])
            for r in self.rows:
                w.writerow([r.run, repr(r.vigilance)] + [repr(t) for t in r.tolerances]
                           + [r.K, r.modal_K, repr(r.error_rate), repr(r.cs), repr(r.fitness),
                              r.epochs, int(r.converged)])
        summary_path = os.path.join(directory, f"{prefix}_summary.json")
        with open(summary_path, "w") as fh:
            json.dump({
                "variant": self.variant,
                "runs": len(self.rows),
                "mean": self.aggregate(),
                "max_vigilance": asdict(self.max_vigilance()),
            }, fh, indent=2, sort_keys=True)
            fh.write("\n")
        return [runs_path, summary_path]


def write_comparison(reports: List[RunReport], path) -> None:
    """One row per variant with the mean and max-vigilance figures side by side."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["variant", "mean_K", "mean_error_rate", "mean_vigilance", "mean_tolerances",
                    "maxvig_vigilance", "maxvig_tolerances", "maxvig_K", "maxvig_error_rate"])
        for rep in reports:
            agg = rep.aggregate()
            mv = rep.max_vigilance()
            w.writerow([
                rep.variant, repr(agg["K"]), repr(agg["error_rate"]), repr(agg["vigilance"]),
                " ".join(f"{t:.4f}" for t in agg["tolerances"]),
                repr(mv.vigilance), " ".join(f"{t:.4f}" for t in mv.tolerances),
                mv.K, repr(mv.error_rate),
            ])

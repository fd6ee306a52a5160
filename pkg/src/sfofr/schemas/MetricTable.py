"""Monte Carlo metric table schema."""

from typing import Dict, List, Optional

import attrs
import numpy as np
import pandas as pd

METRIC_COLUMNS = (
    "rrispee_beta",
    "rrispee_rho",
    "rmspe",
    "cpd_beta",
    "cpd_rho",
    "score_beta",
    "score_rho",
)


@attrs.define(eq=False)
class MetricTable:
    """
    Per-replication accuracy metrics and their aggregates.

    records holds one dict per successful replication, keyed by
    "replication", the METRIC_COLUMNS and "seconds". Bootstrap metrics are
    NaN when the run skipped the bootstrap and are then left out of the
    summary.
    """

    records: List[Dict[str, float]] = attrs.Factory(list)
    failures: List[int] = attrs.Factory(list)

    @property
    def replications(self) -> int:
        return len(self.records)

    def to_frame(self) -> pd.DataFrame:
        """Per-replication metrics, ordered by replication index (no timings)."""
        frame = pd.DataFrame(self.records, columns=["replication", *METRIC_COLUMNS])
        return frame.sort_values("replication").reset_index(drop=True)

    def timings(self) -> pd.DataFrame:
        frame = pd.DataFrame(self.records, columns=["replication", "seconds"])
        return frame.sort_values("replication").reset_index(drop=True)

    def _present(self) -> pd.DataFrame:
        frame = self.to_frame()[list(METRIC_COLUMNS)]
        return frame.loc[:, frame.notna().any(axis=0)]

    def means(self) -> Dict[str, float]:
        return {k: float(v) for k, v in self._present().mean(axis=0).items()}

    def standard_errors(self) -> Optional[Dict[str, float]]:
        """Sample standard deviation over sqrt(replications); None for one replication."""
        if self.replications < 2:
            return None
        present = self._present()
        se = present.std(axis=0, ddof=1) / np.sqrt(self.replications)
        return {k: float(v) for k, v in se.items()}

    def summary_frame(self) -> pd.DataFrame:
        """One row per metric with mean and, for two or more replications, SE."""
        means = self.means()
        summary = pd.DataFrame({"metric": list(means), "mean": list(means.values())})
        errors = self.standard_errors()
        if errors is not None:
            summary["se"] = [errors[name] for name in means]
        return summary

    def __str__(self) -> str:
        lines = [f"Monte Carlo metrics ({self.replications} replications, {len(self.failures)} failed):"]
        errors = self.standard_errors() or {}
        for name, value in self.means().items():
            se = errors.get(name)
            suffix = f" (SE {se:.4f})" if se is not None else ""
            lines.append(f"  {name}: {value:.4f}{suffix}")
        return "\n".join(lines)

"""Run traces: per-step error/update records, CSV output, terminal-state JSON."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = ["RunTrace", "scaled_norm"]


def scaled_norm(v: np.ndarray) -> float:
    """2-norm divided by sqrt(len), the per-component scale used for errors."""
    v = np.asarray(v, dtype=np.float64)
    return float(np.linalg.norm(v) / np.sqrt(v.size))


@dataclass
class RunTrace:
    """Full-resolution error history of a run plus strided state snapshots.

    `t`, `err`, `dmu_max`, `dK_max` (and `phase`, when present) cover every
    step; `recorded` marks the strided subset written to CSV. `err` is
    ||x - mean(y) 1||_2 / sqrt(n) at each step.
    """

    t: np.ndarray
    err: np.ndarray
    dmu_max: np.ndarray
    dK_max: np.ndarray
    reason: str
    final_t: int
    final_mu: np.ndarray
    final_K: np.ndarray
    final_x: np.ndarray
    recorded: np.ndarray | None = None  # bool mask over steps
    x_rows: np.ndarray | None = None  # per-node estimates at recorded steps
    phase: np.ndarray | None = None  # adaptive runs only

    def __post_init__(self):
        if self.recorded is None:
            self.recorded = np.ones(self.t.size, dtype=bool)

    @property
    def final_err(self) -> float:
        return float(self.err[-1])

    def first_sustained_below(self, epsilon: float) -> int | None:
        """First step after which the error never exceeds epsilon again.

        Returns None when the error still exceeds epsilon at the end of the
        horizon (no sustained crossing happened).
        """
        above = self.err > epsilon
        if above[-1]:
            return None
        if not above.any():
            return 0
        last_above = int(np.nonzero(above)[0][-1])
        return int(self.t[last_above]) + 1

    def write_csv(self, path: str | Path, include_x: bool = False) -> None:
        header = "t,err,dmu_max,dK_max"
        if self.phase is not None:
            header += ",phase"
        if include_x and self.x_rows is not None:
            header += "," + ",".join(f"x_{i}" for i in range(self.x_rows.shape[1]))
        lines = [header]
        xi = 0
        for k in np.nonzero(self.recorded)[0]:
            row = f"{int(self.t[k])},{self.err[k]:.17g},{self.dmu_max[k]:.17g},{self.dK_max[k]:.17g}"
            if self.phase is not None:
                row += f",{int(self.phase[k])}"
            if include_x and self.x_rows is not None:
                row += "," + ",".join(f"{v:.17g}" for v in self.x_rows[xi])
            xi += 1
            lines.append(row)
        Path(path).write_text("\n".join(lines) + "\n")

    def write_terminal_json(self, path: str | Path) -> None:
        payload = {
            "t": self.final_t,
            "mu": self.final_mu.tolist(),
            "K": self.final_K.tolist(),
            "x": self.final_x.tolist(),
            "reason": self.reason,
        }
        Path(path).write_text(json.dumps(payload, indent=2) + "\n")

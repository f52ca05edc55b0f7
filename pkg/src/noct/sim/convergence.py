"""Convergence classification from 3-sigma histories.

The label for each scalar variable comes from the ratio of the final to
the initial 3-sigma bound: below 0.1 the variable converged, above 0.3
it did not, in between it is marginal.  A consistency flag records
whether the error stayed within the 3-sigma envelope for at least 95% of
the epochs.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .ekf import EpochRecord

CONVERGED_RATIO = 0.1
NONCONVERGED_RATIO = 0.3
CONSISTENT_FRACTION = 0.95


class ConvergenceLabel(str, Enum):
    CONVERGED = "converged"
    NON_CONVERGED = "non_converged"
    MARGINAL = "marginal"


@dataclass(frozen=True)
class ConvergenceVerdict:
    variable: str
    ratio: float
    label: ConvergenceLabel
    consistent: bool
    final_error: float
    final_sigma3: float

    def to_json_dict(self) -> dict:
        return {
            "variable": self.variable,
            "ratio": self.ratio,
            "label": self.label.value,
            "consistent": self.consistent,
            "final_error": self.final_error,
            "final_sigma3": self.final_sigma3,
        }


def scalar_names(records: list[EpochRecord]) -> list[str]:
    names = []
    first = records[0]
    for var, arr in first.errors.items():
        if len(arr) == 1:
            names.append(var)
        else:
            for ax, _ in zip("xyz", arr):
                names.append(f"{var}_{ax}")
    return names


def _flatten(rec: EpochRecord, field: str) -> np.ndarray:
    data = getattr(rec, field)
    return np.concatenate([np.atleast_1d(data[k]) for k in data])


def classify_convergence(records: list[EpochRecord],
                         variables: list[str] | None = None) -> dict[str, ConvergenceVerdict]:
    """Per-scalar convergence verdicts over a recorded run."""
    if len(records) < 2:
        raise ValueError("need at least two camera epochs to classify")
    names = scalar_names(records)
    errs = np.array([_flatten(r, "errors") for r in records])
    sigs = np.array([_flatten(r, "sigmas3") for r in records])
    verdicts: dict[str, ConvergenceVerdict] = {}
    for i, name in enumerate(names):
        if variables is not None and name not in variables:
            continue
        s0 = sigs[0, i]
        s1 = sigs[-1, i]
        ratio = float(s1 / s0) if s0 > 0 else float("inf")
        if ratio < CONVERGED_RATIO:
            label = ConvergenceLabel.CONVERGED
        elif ratio > NONCONVERGED_RATIO:
            label = ConvergenceLabel.NON_CONVERGED
        else:
            label = ConvergenceLabel.MARGINAL
        within = np.abs(errs[:, i]) <= sigs[:, i]
        consistent = bool(np.mean(within) >= CONSISTENT_FRACTION)
        verdicts[name] = ConvergenceVerdict(
            variable=name, ratio=ratio, label=label, consistent=consistent,
            final_error=float(errs[-1, i]), final_sigma3=float(s1))
    return verdicts

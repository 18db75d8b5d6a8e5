"""Ingestion of external event-time datasets.

Input files hold one value per line (a single-column CSV with an optional
header also works; stray commas and whitespace are tolerated).  Three
interpretations are supported:

* ``inter-event-times`` - the values already are waiting times;
* ``event-times`` - cumulative occurrence times; sorted ascending and
  differenced (the first value is the first waiting time);
* ``branching-times`` - node-to-present times of a phylogenetic tree;
  sorted descending and successively differenced, so the two oldest nodes
  give the first waiting time and the youngest node contributes its own
  distance to the present (nothing is dropped).

Ties would produce a zero waiting time, whose log is undefined; they are
rejected at ingestion.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np

from .estimation import RegressionData, design_from_times
from .processes import ProcessKind

__all__ = ["Interpretation", "InputDataset", "load_values", "summary_stats"]


class Interpretation(str, Enum):
    INTER_EVENT = "inter-event-times"
    EVENT_TIMES = "event-times"
    BRANCHING = "branching-times"


def load_values(path) -> np.ndarray:
    """Read one positive number per line; tolerate a header line and commas."""
    text = Path(path).read_text()
    values = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        tokens = [t for t in raw.replace(",", " ").split() if t]
        if not tokens:
            continue
        try:
            nums = [float(t) for t in tokens]
        except ValueError:
            if lineno == 1 and not values:
                continue  # header
            raise ValueError(f"{path}: line {lineno} is not numeric: {raw.strip()!r}")
        if len(nums) != 1:
            raise ValueError(f"{path}: line {lineno} has {len(nums)} values; expected one")
        values.append(nums[0])
    if not values:
        raise ValueError(f"{path}: no numeric values found")
    arr = np.array(values, dtype=float)
    if not np.isfinite(arr).all() or np.any(arr <= 0.0):
        raise ValueError(f"{path}: values must be finite and strictly positive")
    return arr


@dataclass(frozen=True)
class InputDataset:
    """Raw values plus the reading that turns them into inter-event times."""

    values: np.ndarray
    interpretation: Interpretation = Interpretation.INTER_EVENT
    start_index: int = 1

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))
        object.__setattr__(self, "interpretation", Interpretation(self.interpretation))
        if self.values.ndim != 1 or self.values.size == 0:
            raise ValueError("values must be a nonempty one-dimensional array")
        if not np.isfinite(self.values).all() or np.any(self.values <= 0.0):
            raise ValueError("values must be finite and strictly positive")
        if not self.start_index >= 1:
            raise ValueError(f"start_index must be >= 1, got {self.start_index}")

    def inter_event_times(self) -> np.ndarray:
        if self.interpretation is Interpretation.INTER_EVENT:
            return self.values.copy()
        if self.interpretation is Interpretation.EVENT_TIMES:
            ordered = np.sort(self.values)
            inter = np.diff(ordered, prepend=0.0)
            if np.any(inter == 0.0):
                raise ValueError(
                    "tied event times produce a zero inter-event time, whose log "
                    "is undefined"
                )
            return inter
        ordered = np.sort(self.values)[::-1]
        inter = -np.diff(np.append(ordered, 0.0))
        if np.any(inter == 0.0):
            raise ValueError(
                "tied branching times produce a zero inter-event time, whose log "
                "is undefined"
            )
        return inter

    def design(self, kind: ProcessKind = ProcessKind.YULE) -> RegressionData:
        return design_from_times(self.inter_event_times(), kind, int(self.start_index))


def summary_stats(values: np.ndarray) -> dict:
    """min / quartiles / mean / max / sample sd, quartiles per R's default rule."""
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        raise ValueError("cannot summarize an empty array")
    q1, med, q3 = np.percentile(v, [25.0, 50.0, 75.0])  # linear = R type 7
    return {
        "n": int(v.size),
        "min": float(v.min()),
        "q1": float(q1),
        "median": float(med),
        "mean": float(v.mean()),
        "q3": float(q3),
        "max": float(v.max()),
        "sd": float(v.std(ddof=1)) if v.size > 1 else math.nan,
    }

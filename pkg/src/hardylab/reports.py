"""Sweep reports and the regression fits behind them."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import stats

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class Fit:
    value: float
    half_width: float
    n: int


def _half_width(stderr: float, n: int, level: float = 0.95) -> float:
    if n <= 2:
        return math.inf
    return float(stats.t.ppf(0.5 + level / 2, n - 2) * stderr)


def smallest_half(eps: Sequence[float], *columns):
    """Restrict aligned columns to the rows with the smallest half of eps (at least 3)."""
    eps = np.asarray(eps, dtype=float)
    order = np.argsort(eps)
    m = max(3, int(math.ceil(len(eps) / 2)))
    idx = order[:m]
    return (eps[idx],) + tuple(np.asarray(c, dtype=float)[idx] for c in columns)


def fit_exponent(eps, values) -> Fit:
    """Slope of log|value| against log eps, with a 95% t-interval half-width."""
    x = np.log(np.asarray(eps, dtype=float))
    y = np.log(np.abs(np.asarray(values, dtype=float)))
    res = stats.linregress(x, y)
    return Fit(float(res.slope), _half_width(res.stderr, len(x)), len(x))


def fit_proportionality(numerators, denominators) -> Fit:
    """Slope of numerator against denominator: the limit of num/den when num = L den + O(1)."""
    x = np.asarray(denominators, dtype=float)
    y = np.asarray(numerators, dtype=float)
    res = stats.linregress(x, y)
    return Fit(float(res.slope), _half_width(res.stderr, len(x)), len(x))


def format_number(x: float) -> str:
    """Shortest round-trip text for a float; stable across runs and platforms."""
    return repr(float(x))


@dataclass
class SweepReport:
    """Rows of (sweep variable, measured value) plus fitted summary numbers."""

    name: str
    rows: list
    fitted_exponent: float | None = None
    exponent_half_width: float | None = None
    fitted_limit: float | None = None
    limit_half_width: float | None = None
    expected: dict = field(default_factory=dict)
    verdict: str | None = None
    notes: list = field(default_factory=list)
    columns: tuple = ("epsilon", "value")

    def __post_init__(self):
        self.rows = sorted((tuple(float(v) for v in r) for r in self.rows), key=lambda r: r[0])

    @property
    def sweep(self) -> np.ndarray:
        return np.array([r[0] for r in self.rows])

    @property
    def values(self) -> np.ndarray:
        return np.array([r[1] for r in self.rows])

    def column(self, name: str) -> np.ndarray:
        i = self.columns.index(name)
        return np.array([r[i] for r in self.rows])

    def to_csv(self) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\r\n")
        wr.writerow(self.columns)
        for r in self.rows:
            wr.writerow([format_number(v) for v in r])
        return buf.getvalue()

    def summary(self) -> dict:
        return {
            "name": self.name,
            "fitted_exponent": self.fitted_exponent,
            "exponent_half_width": self.exponent_half_width,
            "fitted_limit": self.fitted_limit,
            "limit_half_width": self.limit_half_width,
            "expected": self.expected,
            "verdict": self.verdict,
            "notes": self.notes,
            "n_rows": len(self.rows),
        }

    def to_json(self) -> str:
        return json.dumps(self.summary(), indent=2, sort_keys=True)

"""Experiment reports: one JSON schema for every experiment, CSV for series."""

from __future__ import annotations

import csv
import io
import json
import math
import time
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

from . import __version__


def _clean(v: Any) -> Any:
    # numpy scalars, mpmath numbers and Fractions -> plain JSON values
    if isinstance(v, dict):
        return {str(k): _clean(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_clean(x) for x in v]
    if isinstance(v, bool) or v is None or isinstance(v, str):
        return v
    if isinstance(v, int):
        return v
    if hasattr(v, "item") and not hasattr(v, "numerator"):
        return _clean(v.item())
    if isinstance(v, float):
        return v if math.isfinite(v) else str(v)
    try:
        if type(v).__name__ == "Fraction":
            return str(v)
        f = float(v)
        return f if math.isfinite(f) else str(f)
    except (TypeError, ValueError):
        return str(v)


@dataclass
class ExperimentReport:
    """Paired (empirical, oracle, tolerance) statistics plus free-form extras.

    ``verdict`` is pass iff |empirical - oracle| <= tolerance for every pair.
    """

    name: str
    seed: Optional[int]
    params: Dict[str, Any]
    labels: List[str] = field(default_factory=list)
    empirical: List[float] = field(default_factory=list)
    oracle: List[float] = field(default_factory=list)
    tolerance: List[float] = field(default_factory=list)
    extra: Dict[str, Any] = field(default_factory=dict)
    series: Dict[str, List[Dict[str, Any]]] = field(default_factory=dict)

    def add(self, label: str, empirical: float, oracle: float, tolerance: float) -> None:
        self.labels.append(label)
        self.empirical.append(float(empirical))
        self.oracle.append(float(oracle))
        self.tolerance.append(float(tolerance))

    def passed(self) -> List[bool]:
        return [abs(e - o) <= t for e, o, t in zip(self.empirical, self.oracle, self.tolerance)]

    @property
    def verdict(self) -> bool:
        return all(self.passed())

    def failures(self) -> List[str]:
        return [lab for lab, ok in zip(self.labels, self.passed()) if not ok]

    def to_dict(self, timestamp: bool = False) -> Dict[str, Any]:
        d = {
            "name": self.name,
            "version": __version__,
            "seed": self.seed,
            "params": _clean(self.params),
            "labels": self.labels,
            "empirical": _clean(self.empirical),
            "oracle": _clean(self.oracle),
            "tolerance": _clean(self.tolerance),
            "verdict": "pass" if self.verdict else "fail",
            "failures": self.failures(),
            "extra": _clean(self.extra),
            "series": _clean(self.series),
        }
        if timestamp:
            d["timestamp"] = time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())
        return d

    def to_json(self, timestamp: bool = False, indent: int = 2) -> str:
        return json.dumps(self.to_dict(timestamp), indent=indent)

    def series_csv(self, name: Optional[str] = None) -> str:
        """CSV of one series (default: the first), or of the paired statistics if there is none."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        if not self.series:
            w.writerow(["label", "empirical", "oracle", "tolerance", "pass"])
            for row in zip(self.labels, self.empirical, self.oracle, self.tolerance, self.passed()):
                w.writerow(row)
            return buf.getvalue()
        rows = self.series[name or next(iter(self.series))]
        if rows:
            cols = list(rows[0])
            w.writerow(cols)
            for r in rows:
                w.writerow([_clean(r[c]) for c in cols])
        return buf.getvalue()


def dumps(obj: Any, indent: int = 2) -> str:
    """JSON for arbitrary result dicts, with the same value cleaning as reports."""
    return json.dumps(_clean(obj), indent=indent)

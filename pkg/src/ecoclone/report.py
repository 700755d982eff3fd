"""Machine-readable command reports.

JSON layout::

    {
      "command": str, "dimension": int, "seed": int | null,
      "parameters": {...}, "results": {...}, "tolerances": {name: float},
      "verdicts": [{"claim": str, "passed": bool, "tolerance": str}]
    }

Complex arrays are stored as ``{"re": [...], "im": [...]}``. Every verdict
names the entry of ``tolerances`` used to judge it.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np


def to_plain(obj: Any) -> Any:
    """Convert numpy/complex values into JSON-compatible structures."""
    if isinstance(obj, dict):
        return {str(k): to_plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        if np.iscomplexobj(obj):
            return {"re": to_plain(obj.real.tolist()), "im": to_plain(obj.imag.tolist())}
        return to_plain(obj.tolist())
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": float(obj.real), "im": float(obj.imag)}
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x) or math.isinf(x):
            return None
        return x
    return obj


@dataclass
class Verdict:
    claim: str
    passed: bool
    tolerance: str

    def as_dict(self) -> dict:
        return {"claim": self.claim, "passed": bool(self.passed), "tolerance": self.tolerance}


@dataclass
class Report:
    command: str
    dimension: int
    parameters: dict = field(default_factory=dict)
    results: dict = field(default_factory=dict)
    tolerances: dict = field(default_factory=dict)
    seed: Optional[int] = None
    verdicts: list[Verdict] = field(default_factory=list)

    def check(self, claim: str, passed: bool, tolerance: str) -> bool:
        if tolerance not in self.tolerances:
            raise KeyError(f"verdict {claim!r} refers to unknown tolerance {tolerance!r}")
        self.verdicts.append(Verdict(claim, bool(passed), tolerance))
        return bool(passed)

    @property
    def all_passed(self) -> bool:
        return all(v.passed for v in self.verdicts)

    def as_dict(self) -> dict:
        return to_plain(
            {
                "command": self.command,
                "dimension": self.dimension,
                "seed": self.seed,
                "parameters": self.parameters,
                "results": self.results,
                "tolerances": self.tolerances,
                "verdicts": [v.as_dict() for v in self.verdicts],
            }
        )

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "Report":
        raw = json.loads(text)
        return cls(
            command=raw["command"],
            dimension=raw["dimension"],
            parameters=raw["parameters"],
            results=raw["results"],
            tolerances=raw["tolerances"],
            seed=raw["seed"],
            verdicts=[Verdict(v["claim"], v["passed"], v["tolerance"]) for v in raw["verdicts"]],
        )

    def to_text(self) -> str:
        data = self.as_dict()
        lines = [f"{self.command}  (d={self.dimension}, seed={self.seed})"]
        for section in ("parameters", "results", "tolerances"):
            if data[section]:
                lines.append(f"[{section}]")
                lines += [f"  {k} = {_short(v)}" for k, v in sorted(data[section].items())]
        if self.verdicts:
            lines.append("[verdicts]")
            for v in self.verdicts:
                mark = "PASS" if v.passed else "FAIL"
                lines.append(f"  {mark}  {v.claim}  (tol: {v.tolerance}={self.tolerances[v.tolerance]:g})")
        return "\n".join(lines) + "\n"

    def to_csv(self, table: str = "rows") -> str:
        rows = self.results.get(table)
        if not rows:
            raise ValueError(f"report has no tabular result {table!r}")
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=list(rows[0].keys()), lineterminator="\n")
        w.writeheader()
        for r in to_plain(rows):
            w.writerow({k: repr(v) if isinstance(v, float) else v for k, v in r.items()})
        return buf.getvalue()


def _short(v: Any) -> str:
    s = json.dumps(v, sort_keys=True)
    return s if len(s) <= 160 else s[:157] + "..."

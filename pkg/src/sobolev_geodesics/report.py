"""Experiment reports: rows of computed-vs-reference quantities, CSV and JSON output."""

from __future__ import annotations

import csv
import io
import json
import math
import os
from dataclasses import asdict, dataclass, field

COLUMNS = ("experiment", "case", "quantity", "computed", "reference", "rel_err", "pass")


@dataclass
class Row:
    experiment: str
    case: str
    quantity: str
    computed: float
    reference: float | None = None
    rel_err: float | None = None
    passed: bool | None = None


def _fmt(x):
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    return repr(float(x))


@dataclass
class ExperimentReport:
    experiment: str
    config: dict = field(default_factory=dict)
    rows: list = field(default_factory=list)

    def add(self, case, quantity, computed, reference=None, tol=None, relation="=="):
        """Append a row.

        ``relation`` is ``==`` (relative error), ``<=`` or ``>=`` (relative
        excess beyond the reference, zero when the bound holds).  ``passed``
        is only set when both a reference and a tolerance are given.
        """
        computed = float(computed)
        rel = None
        ok = None
        if reference is not None:
            reference = float(reference)
            scale = abs(reference) if reference != 0 else 1.0
            if relation == "==":
                rel = abs(computed - reference) / scale
            elif relation == "<=":
                rel = max(0.0, computed - reference) / scale
            elif relation == ">=":
                rel = max(0.0, reference - computed) / scale
            else:
                raise ValueError(f"unknown relation {relation!r}")
            if tol is not None:
                ok = bool(math.isfinite(computed) and rel <= tol)
        row = Row(self.experiment, case, quantity, computed, reference, rel, ok)
        self.rows.append(row)
        return row

    def check(self, case, quantity, condition: bool):
        """Boolean row: computed and reference are 1/0 flags."""
        return self.add(case, quantity, 1.0 if condition else 0.0, 1.0, 0.0)

    @property
    def passed(self):
        return all(r.passed is not False for r in self.rows)

    def failures(self):
        return [r for r in self.rows if r.passed is False]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(COLUMNS)
        for r in self.rows:
            w.writerow([r.experiment, r.case, r.quantity, _fmt(r.computed), _fmt(r.reference),
                        _fmt(r.rel_err), _fmt(r.passed)])
        return buf.getvalue()

    def to_json(self) -> str:
        rows = []
        for r in self.rows:
            d = asdict(r)
            d["pass"] = d.pop("passed")
            for k in ("computed", "reference", "rel_err"):
                if d[k] is not None and not math.isfinite(d[k]):
                    d[k] = str(d[k])
            rows.append(d)
        return json.dumps({"experiment": self.experiment, "config": self.config, "rows": rows},
                          indent=2, sort_keys=True) + "\n"

    def write(self, out_dir):
        os.makedirs(out_dir, exist_ok=True)
        with open(os.path.join(out_dir, "report.csv"), "w", encoding="utf-8", newline="") as fh:
            fh.write(self.to_csv())
        with open(os.path.join(out_dir, "report.json"), "w", encoding="utf-8", newline="") as fh:
            fh.write(self.to_json())

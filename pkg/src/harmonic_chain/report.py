"""Scenario reports: config echo, result tables and pass/fail checks."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np


@dataclass
class Check:
    name: str
    value: float
    target: float
    tolerance: float
    passed: bool
    note: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        text = (f"[{status}] {self.name}: value={self.value:.10g} "
                f"target={self.target:.10g} tol={self.tolerance:.3g}")
        return f"{text} ({self.note})" if self.note else text


@dataclass
class Table:
    columns: list[str]
    rows: list[tuple] = field(default_factory=list)

    def add(self, *row):
        self.rows.append(tuple(row))


@dataclass
class ScenarioReport:
    name: str
    config: dict
    tables: dict[str, Table] = field(default_factory=dict)
    checks: list[Check] = field(default_factory=list)
    wall_clock: float = 0.0
    notes: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def check(self, name, value, target, tolerance, passed=None, note=""):
        """Record a check; by default it passes iff ``|value - target| <= tolerance``."""
        value, target = float(value), float(target)
        if passed is None:
            passed = math.isfinite(value) and abs(value - target) <= tolerance
        c = Check(name, value, target, float(tolerance), bool(passed), note)
        self.checks.append(c)
        return c

    def to_dict(self) -> dict:
        return {
            "scenario": self.name,
            "config": _plain(self.config),
            "tables": {k: {"columns": t.columns, "rows": _plain(t.rows)}
                       for k, t in self.tables.items()},
            "checks": [asdict(c) for c in self.checks],
            "passed": self.passed,
            "notes": self.notes,
            "wall_clock": self.wall_clock,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def to_csv(self) -> str:
        """Long-form rows ``scenario,table,key1,key2,value``.

        Table rows contribute one line per non-key column: ``key1`` is the
        first column's value, ``key2`` joins the remaining key columns and the
        column name.  Checks appear under table ``check``.
        """
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["scenario", "table", "key1", "key2", "value"])
        for k, v in sorted(self.config.items()):
            w.writerow([self.name, "config", k, "", _fmt(v)])
        for tname, t in self.tables.items():
            nkeys = _key_columns(t)
            for row in t.rows:
                keys = [_fmt(x) for x in row[:nkeys]]
                for col, val in zip(t.columns[nkeys:], row[nkeys:]):
                    w.writerow([self.name, tname, keys[0] if keys else "",
                                "/".join(keys[1:] + [col]), _fmt(val)])
        for c in self.checks:
            w.writerow([self.name, "check", c.name, "value", _fmt(c.value)])
            w.writerow([self.name, "check", c.name, "passed", int(c.passed)])
        return buf.getvalue()

    def table_csv(self, name: str) -> str:
        """One table in wide comma-separated form."""
        t = self.tables[name]
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(t.columns)
        for row in t.rows:
            w.writerow([_fmt(x) for x in row])
        return buf.getvalue()


def _key_columns(t: Table) -> int:
    n = 0
    for x in t.rows[0] if t.rows else ():
        if isinstance(x, (str, int, np.integer)) and not isinstance(x, bool):
            n += 1
        else:
            break
    return max(1, n) if t.rows else 1


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _plain(obj):
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    return obj

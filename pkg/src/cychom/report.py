"""Machine-readable run reports.

A report is a sequence of JSON objects written one per line:

* a ``header`` record with the schema version, command, inputs (with content
  hashes) and seed;
* one ``result`` record per checked item;
* a ``summary`` record with the verdict, exit code, a hash of every preceding
  record plus the verdict, and a ``timings`` field that is excluded from
  that hash.

Records use sorted keys and canonical number formatting, so two runs with the
same inputs and seed differ only inside ``timings``.  The text format renders
the same records for reading.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

from .exactnum import LaurentScalar, format_rational

__all__ = ["SCHEMA_VERSION", "RunReport", "jsonable", "content_hash", "parse_jsonl"]

SCHEMA_VERSION = "cychom-report/1"


def jsonable(x: Any) -> Any:
    """Convert report payloads (Fractions, Laurent scalars, tuples, reports) to JSON data."""
    if isinstance(x, bool) or x is None or isinstance(x, (int, str)):
        return x
    if isinstance(x, Fraction):
        return format_rational(x)
    if isinstance(x, float):
        return repr(x)
    if isinstance(x, LaurentScalar):
        return str(x)
    if hasattr(x, "to_json"):
        return jsonable(x.to_json())
    if isinstance(x, dict):
        return {str(k) if not isinstance(k, str) else k: jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, set, frozenset)):
        seq = sorted(x, key=repr) if isinstance(x, (set, frozenset)) else x
        return [jsonable(v) for v in seq]
    return repr(x)


def _dumps(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def content_hash(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()[:16]


@dataclass
class RunReport:
    command: str
    inputs: dict = field(default_factory=dict)
    seed: int | None = None
    results: list = field(default_factory=list)
    timings: dict = field(default_factory=dict)
    error: str | None = None

    def add(self, kind: str, name: str, passed: bool | None, **data) -> None:
        self.results.append({"kind": kind, "name": name, "passed": passed, **data})

    @property
    def passed(self) -> bool:
        return self.error is None and all(r["passed"] is not False for r in self.results)

    @property
    def exit_code(self) -> int:
        if self.error is not None:
            return 2
        return 0 if self.passed else 1

    def records(self) -> list[dict]:
        head = {"record": "header", "schema": SCHEMA_VERSION, "command": self.command,
                "inputs": jsonable(self.inputs), "seed": self.seed}
        body = [{"record": "result", **jsonable(r)} for r in self.results]
        summary = {"record": "summary", "passed": self.passed, "exit_code": self.exit_code,
                   "error": self.error, "n_results": len(self.results)}
        digest = content_hash("\n".join(_dumps(r) for r in [head, *body, summary]))
        summary["report_hash"] = digest
        summary["timings"] = {k: round(float(v), 3) for k, v in sorted(self.timings.items())}
        return [head, *body, summary]

    def to_jsonl(self) -> str:
        return "".join(_dumps(r) + "\n" for r in self.records())

    def to_text(self) -> str:
        lines = []
        recs = self.records()
        head = recs[0]
        lines.append(f"{head['command']}  (schema {head['schema']}, seed {head['seed']})")
        for k, v in sorted(head["inputs"].items()):
            lines.append(f"  input {k}: {v if not isinstance(v, dict) else _dumps(v)}")
        for r in recs[1:-1]:
            mark = {True: "PASS", False: "FAIL", None: "INFO"}[r["passed"]]
            extra = {k: v for k, v in r.items() if k not in ("record", "kind", "name", "passed")}
            lines.append(f"[{mark}] {r['kind']}: {r['name']}")
            for k in sorted(extra):
                lines.append(f"    {k}: {_dumps(extra[k])}")
        s = recs[-1]
        verdict = "PASS" if s["passed"] else ("ERROR" if s["error"] else "FAIL")
        lines.append(f"{verdict} (exit {s['exit_code']}, hash {s['report_hash']})")
        if s["error"]:
            lines.append(f"error: {s['error']}")
        return "\n".join(lines) + "\n"

    def render(self, fmt: str) -> str:
        return self.to_jsonl() if fmt == "json" else self.to_text()


def parse_jsonl(text: str) -> list[dict]:
    """Parse a report and verify its hash; raises ValueError on mismatch."""
    recs = [json.loads(line) for line in text.splitlines() if line.strip()]
    if not recs or recs[0].get("schema") != SCHEMA_VERSION:
        raise ValueError("not a cychom report")
    summary = dict(recs[-1])
    summary.pop("timings", None)
    digest = summary.pop("report_hash", None)
    if content_hash("\n".join(_dumps(r) for r in [*recs[:-1], summary])) != digest:
        raise ValueError("report hash mismatch")
    return recs

"""Probe result records and their CSV/JSON serialization."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

CSV_COLUMNS = ("probe_id", "param_json", "lhs", "rhs", "ratio", "stderr", "seed", "runtime_ms")


class ProbeAssertionError(AssertionError):
    """Raised when a probe's asserted ordering fails."""


def safe_ratio(lhs, rhs):
    """lhs/rhs with 0/0 -> 0 and x/0 -> inf."""
    lhs, rhs = float(lhs), float(rhs)
    if lhs == 0.0:
        return 0.0
    if rhs == 0.0:
        return math.inf
    return lhs / rhs


def ratio_stderr(lhs, rhs, se_lhs=0.0, se_rhs=0.0):
    """Delta-method standard error of lhs/rhs."""
    if lhs == 0.0 or rhs == 0.0:
        return 0.0
    rel = math.hypot(se_lhs / lhs, se_rhs / rhs)
    return abs(lhs / rhs) * rel


def _jsonable(v):
    if isinstance(v, (np.floating,)):
        return float(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, np.ndarray):
        return [_jsonable(x) for x in v.tolist()]
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, complex):
        return [v.real, v.imag]
    return v


def _fmt(x):
    if x is None:
        return ""
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return repr(x)


@dataclass
class ProbeResult:
    """Named two-sided quantities of an inequality plus the measured ratio.

    ``lhs <= C * rhs`` is the asserted direction; ``ratio = lhs / rhs``.
    ``quantities`` carries every intermediate norm a probe computes and
    ``constants`` the explicit constant (if any) used in an assertion.
    """

    probe_id: str
    lhs: float
    rhs: float
    ratio: float | None = None
    stderr: float = 0.0
    seed: int | None = None
    params: dict = field(default_factory=dict)
    quantities: dict = field(default_factory=dict)
    constants: dict = field(default_factory=dict)
    holds: bool = True
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        self.lhs = float(self.lhs)
        self.rhs = float(self.rhs)
        if self.ratio is None:
            self.ratio = safe_ratio(self.lhs, self.rhs)
        self.ratio = float(self.ratio)
        self.stderr = float(self.stderr)

    def require(self):
        """Raise ProbeAssertionError if the asserted ordering failed."""
        if not self.holds:
            raise ProbeAssertionError(f"{self.probe_id}: ordering failed {self.diagnostics}")
        return self

    def as_dict(self) -> dict[str, Any]:
        return {
            "probe_id": self.probe_id,
            "params": _jsonable(self.params),
            "lhs": self.lhs,
            "rhs": self.rhs,
            "ratio": self.ratio,
            "stderr": self.stderr,
            "seed": self.seed,
            "quantities": _jsonable(self.quantities),
            "constants": _jsonable(self.constants),
            "holds": self.holds,
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), sort_keys=True)

    def csv_row(self, runtime_ms=None):
        return [
            self.probe_id,
            json.dumps(_jsonable(self.params), sort_keys=True, separators=(",", ":")),
            _fmt(self.lhs),
            _fmt(self.rhs),
            _fmt(self.ratio),
            _fmt(self.stderr),
            "" if self.seed is None else str(int(self.seed)),
            "" if runtime_ms is None else f"{runtime_ms:.3f}",
        ]


def write_csv(results, path_or_buf, runtimes=None, header=True):
    """Write probe rows in the fixed schema. Returns the text written."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if header:
        w.writerow(CSV_COLUMNS)
    for i, res in enumerate(results):
        rt = None if runtimes is None else runtimes[i]
        w.writerow(res.csv_row(rt))
    text = buf.getvalue()
    if hasattr(path_or_buf, "write"):
        path_or_buf.write(text)
    elif path_or_buf is not None:
        with open(path_or_buf, "w", newline="") as fh:
            fh.write(text)
    return text


def read_csv(path_or_buf):
    """Read probe rows; raises ValueError on schema mismatch."""
    if hasattr(path_or_buf, "read"):
        text = path_or_buf.read()
    else:
        with open(path_or_buf, newline="") as fh:
            text = fh.read()
    if not text.strip():
        return []
    reader = csv.reader(io.StringIO(text))
    head = next(reader)
    if tuple(head) != CSV_COLUMNS:
        raise ValueError(f"schema mismatch: expected {CSV_COLUMNS}, got {tuple(head)}")
    rows = []
    for rec in reader:
        if not rec:
            continue
        if len(rec) != len(CSV_COLUMNS):
            raise ValueError(f"schema mismatch in row {rec!r}")
        d = dict(zip(CSV_COLUMNS, rec))
        d["params"] = json.loads(d.pop("param_json") or "{}")
        for k in ("lhs", "rhs", "ratio", "stderr"):
            d[k] = float(d[k])
        d["seed"] = int(d["seed"]) if d["seed"] else None
        d["runtime_ms"] = float(d["runtime_ms"]) if d["runtime_ms"] else None
        rows.append(d)
    return rows

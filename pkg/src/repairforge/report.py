"""Repair accounting: what each helper read and sent, against the optimum."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import BadHelperCount

REPORT_SCHEMA = "repairforge-report/1"


def gamma_star(n: int, k: int, d: int, alpha: int) -> Fraction:
    """Minimum total repair download with ``d`` helpers: ``d * alpha / (d - k + 1)``."""
    if not k <= d <= n - 1:
        raise BadHelperCount(f"helper count d={d} outside [{k}, {n - 1}]")
    return Fraction(d * alpha, d - k + 1)


@dataclass(frozen=True)
class HelperUsage:
    node: int
    accessed: int
    downloaded: int
    rows: tuple[int, ...] = ()


@dataclass
class RepairReport:
    failed: int
    n: int
    k: int
    alpha: int
    method: str
    helpers: list[HelperUsage] = field(default_factory=list)

    @property
    def r(self) -> int:
        return self.n - self.k

    @property
    def optimal_per_node(self) -> Fraction:
        return Fraction(self.alpha, self.r)

    @property
    def total_accessed(self) -> int:
        return sum(h.accessed for h in self.helpers)

    @property
    def total_downloaded(self) -> int:
        return sum(h.downloaded for h in self.helpers)

    @property
    def optimal_access(self) -> bool:
        return len(self.helpers) == self.n - 1 and all(
            h.accessed == self.optimal_per_node for h in self.helpers)

    @property
    def optimal_bandwidth(self) -> bool:
        return len(self.helpers) == self.n - 1 and all(
            h.downloaded == self.optimal_per_node for h in self.helpers)

    def rows_accessed(self) -> set[int] | None:
        """The common row set read at every helper, or None if helpers differ."""
        sets = {h.rows for h in self.helpers}
        return set(sets.pop()) if len(sets) == 1 else None

    def to_dict(self) -> dict:
        return {
            "schema": REPORT_SCHEMA,
            "failed": self.failed,
            "n": self.n,
            "k": self.k,
            "alpha": self.alpha,
            "method": self.method,
            "optimal_per_node": str(self.optimal_per_node),
            "total_accessed": self.total_accessed,
            "total_downloaded": self.total_downloaded,
            "optimal_access": self.optimal_access,
            "optimal_bandwidth": self.optimal_bandwidth,
            "helpers": [
                {"node": h.node, "accessed": h.accessed, "downloaded": h.downloaded,
                 "rows": list(h.rows)}
                for h in self.helpers
            ],
        }


CSV_FIELDS = ("schema", "failed", "method", "helpers", "accessed_per_helper", "downloaded_per_helper",
              "total_accessed", "total_downloaded", "optimal_per_node", "optimal_access",
              "optimal_bandwidth", "rows")


def _per_helper(values: list[int]) -> str:
    distinct = sorted(set(values))
    return str(distinct[0]) if len(distinct) == 1 else "/".join(map(str, distinct))


def format_rows(rows, one_based: bool = True) -> str:
    if rows is None:
        return "varies"
    shift = 1 if one_based else 0
    return "{" + ",".join(str(x + shift) for x in sorted(rows)) + "}"


def render_text(reports: list[RepairReport], title: str = "") -> str:
    """Human-readable table; row indices are 1-based."""
    lines = [title] if title else []
    if reports:
        first = reports[0]
        lines.append(f"n={first.n} k={first.k} alpha={first.alpha} "
                     f"optimal per helper={first.optimal_per_node}")
    lines.append(f"{'node':>4}  {'method':<9} {'access/helper':>13} {'download':>9}  optimal  rows")
    for rep in reports:
        opt = "yes" if rep.optimal_access and rep.optimal_bandwidth else "no"
        lines.append(f"{rep.failed:>4}  {rep.method:<9} "
                     f"{_per_helper([h.accessed for h in rep.helpers]):>13} "
                     f"{rep.total_downloaded:>9}  {opt:<7}  {format_rows(rep.rows_accessed())}")
    return "\n".join(lines) + "\n"


def render_csv(reports: list[RepairReport]) -> str:
    """One CSV row per failed node; row indices are 1-based."""
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_FIELDS, lineterminator="\n")
    writer.writeheader()
    for rep in reports:
        writer.writerow({
            "schema": REPORT_SCHEMA, "failed": rep.failed, "method": rep.method,
            "helpers": len(rep.helpers),
            "accessed_per_helper": _per_helper([h.accessed for h in rep.helpers]),
            "downloaded_per_helper": _per_helper([h.downloaded for h in rep.helpers]),
            "total_accessed": rep.total_accessed, "total_downloaded": rep.total_downloaded,
            "optimal_per_node": str(rep.optimal_per_node),
            "optimal_access": rep.optimal_access, "optimal_bandwidth": rep.optimal_bandwidth,
            "rows": format_rows(rep.rows_accessed()),
        })
    return buf.getvalue()


def render_json(reports: list[RepairReport], **extra) -> str:
    """JSON document with 0-based row indices."""
    return json.dumps({"schema": REPORT_SCHEMA, **extra,
                       "reports": [rep.to_dict() for rep in reports]}, indent=1) + "\n"

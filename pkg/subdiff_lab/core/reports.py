"""
Experiment records, reports and their JSON/CSV persistence.
"""
from dataclasses import dataclass, field, fields
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence
import csv
import hashlib
import io
import json
import logging
import statistics

import numpy as np

from .dyadic import GENERATOR_ID, DyadicRational

SCHEMA_VERSION = "1.0"


def encode_value(value: Any) -> Any:
    """JSON-safe form of a record value; rationals become "p/q" strings"""
    if isinstance(value, Fraction):
        return f"{value.numerator}/{value.denominator}"
    if isinstance(value, DyadicRational):
        return encode_value(value.as_fraction())
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, (list, tuple)):
        return [encode_value(item) for item in value]
    if isinstance(value, dict):
        return {str(key): encode_value(item) for key, item in value.items()}
    return value


class Record:
    """Mixin for row dataclasses: exact values are written next to their float"""

    def to_row(self) -> Dict[str, Any]:
        row: Dict[str, Any] = {}
        for f in fields(self):
            value = getattr(self, f.name)
            row[f.name] = encode_value(value)
            if isinstance(value, (Fraction, DyadicRational)):
                row[f"{f.name}_float"] = float(value)
        return row


@dataclass
class GapTrial(Record):
    """Outcome of one gap trial (either construction)"""
    seed: int
    nu: int
    K: int
    delta: Fraction
    found: bool
    k: Optional[int] = None
    gap: Optional[Fraction] = None
    bound_140_delta: Optional[Fraction] = None
    lower_bound: Optional[Fraction] = None
    eps_max: Optional[Fraction] = None
    eps_lower_bound: Optional[Fraction] = None
    trial: int = 0


@dataclass
class GadgetTrial(Record):
    """One run of the joint-bit event finder"""
    seed: int
    nu: int
    K: int
    found: bool
    k: Optional[int] = None
    trial: int = 0


@dataclass
class ShatterRow(Record):
    """A pattern b in {0,1}^n and the smallest k realizing it"""
    pattern: str
    k: Optional[int]


@dataclass
class ConvergenceRow(Record):
    """sup_x gap of one (nu, seed) trial of a uniform-law experiment"""
    nu: int
    seed: int
    gap: float
    grid_error_bound: Optional[float] = None
    trial: int = 0


@dataclass
class ExperimentReport:
    """Config echo, ordered rows, summary and run metadata"""
    experiment: str
    config: Dict[str, Any]
    rows: List[Record]
    summary: Dict[str, Any] = field(default_factory=dict)
    generator: str = GENERATOR_ID
    wall_time_s: float = 0.0
    schema_version: str = SCHEMA_VERSION

    def row_dicts(self) -> List[Dict[str, Any]]:
        return [row.to_row() for row in self.rows]

    @property
    def rows_checksum(self) -> str:
        return rows_checksum(self.row_dicts())

    def metadata(self) -> Dict[str, Any]:
        """Everything except the rows"""
        return {
            "experiment": self.experiment,
            "config": encode_value(self.config),
            "summary": encode_value(self.summary),
            "generator": self.generator,
            "wall_time_s": self.wall_time_s,
            "schema_version": self.schema_version,
            "rows_checksum": self.rows_checksum,
        }

    def to_dict(self) -> Dict[str, Any]:
        data = self.metadata()
        data["rows"] = self.row_dicts()
        return data


class GapReport(ExperimentReport):
    pass


class ConvergenceReport(ExperimentReport):
    pass


class GadgetReport(ExperimentReport):
    pass


class ShatterReport(ExperimentReport):
    pass


def rows_checksum(rows: Sequence[Dict[str, Any]]) -> str:
    """SHA-256 over the canonical JSON of the rows"""
    canonical = json.dumps(list(rows), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def _fraction_median(values: Sequence[Fraction]) -> Fraction:
    return statistics.median(sorted(values))


def summarize_gaps(trials: Sequence[GapTrial]) -> Dict[str, Any]:
    """success_rate, min/median gap and the exact-half check over one gap run"""
    found = [trial for trial in trials if trial.found]
    gaps = [trial.gap for trial in found]
    summary: Dict[str, Any] = {
        "trials": len(trials),
        "found": len(found),
        "success_rate": len(found) / len(trials) if trials else 0.0,
        "all_gaps_exact_half": bool(gaps) and all(gap == Fraction(1, 2) for gap in gaps),
        "min_gap": min(gaps) if gaps else None,
        "median_gap": _fraction_median(gaps) if gaps else None,
    }
    if trials:
        nu = trials[0].nu
        summary["nu"] = nu
        summary["failure_bound"] = Fraction(1, (nu + 1) ** 2)
        summary["K"] = trials[0].K
        summary["delta"] = trials[0].delta
        if trials[0].bound_140_delta is not None:
            summary["bound_140_delta"] = trials[0].bound_140_delta
            summary["lower_bound"] = trials[0].lower_bound
            summary["eps_max"] = trials[0].eps_max
            summary["eps_lower_bound"] = trials[0].eps_lower_bound
    return summary


class ReportWriter:
    """
    Renders reports as JSON or CSV.

    JSON holds one document per run (UTF-8, sorted keys). CSV holds the
    rows under a header row; when written to a file, the remaining fields
    go to a `<name>.meta.json` sidecar. Both formats share rows_checksum.
    """
    FORMATS = ("json", "csv")

    def __init__(self):
        self.logger = logging.getLogger(__name__)

    def render(self, report: ExperimentReport, fmt: str = "json") -> str:
        if fmt == "json":
            return json.dumps(report.to_dict(), indent=2, sort_keys=True, ensure_ascii=False) + "\n"
        if fmt == "csv":
            return self._render_csv(report.row_dicts())
        raise ValueError(f"Unknown report format: {fmt}")

    def _render_csv(self, rows: List[Dict[str, Any]]) -> str:
        buffer = io.StringIO()
        header: List[str] = []
        for row in rows:
            header.extend(key for key in row if key not in header)
        writer = csv.DictWriter(buffer, fieldnames=header, lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({key: "" if row.get(key) is None else row[key] for key in header})
        return buffer.getvalue()

    async def write(self, report: ExperimentReport, out: Optional[Path], fmt: str = "json") -> Optional[Path]:
        """Write the report to `out`, or return the rendering unsaved when out is None"""
        content = self.render(report, fmt)
        if out is None:
            return None
        try:
            out = Path(out)
            with open(out, "w", encoding="utf-8") as f:
                f.write(content)
            if fmt == "csv":
                sidecar = out.with_name(out.name + ".meta.json")
                with open(sidecar, "w", encoding="utf-8") as f:
                    json.dump(report.metadata(), f, indent=2, sort_keys=True, ensure_ascii=False)
                    f.write("\n")
            self.logger.info(f"Wrote {report.experiment} report ({len(report.rows)} rows) to {out}")
            return out

        except OSError as e:
            self.logger.error(f"Error writing report to {out}: {str(e)}")
            raise

    @staticmethod
    def read_csv_rows(text: str) -> List[Dict[str, str]]:
        """Parse rows written by `render(..., "csv")`"""
        return list(csv.DictReader(io.StringIO(text)))

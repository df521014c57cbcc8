"""Report rows and CSV emission."""
import csv
import logging
import math
import sys
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence

ROW_COLUMNS = ["experiment", "operation", "params", "value", "slack", "tolerance", "passed"]


def fmt_value(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return f"{x:.15g}"
    return str(x)


@dataclass
class ReportRow:
    """One verification outcome; passes iff slack >= -tolerance."""
    experiment: str
    operation: str
    value: float
    slack: float
    tolerance: float
    params: Dict[str, object] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return not math.isnan(self.slack) and self.slack >= -self.tolerance

    def as_list(self) -> List[str]:
        params = ";".join(f"{k}={fmt_value(v)}" for k, v in self.params.items())
        return [
            self.experiment,
            self.operation,
            params,
            fmt_value(float(self.value)),
            fmt_value(float(self.slack)),
            fmt_value(float(self.tolerance)),
            fmt_value(self.passed),
        ]


class ReportWriter:
    """Buffers rows in submission order and writes them as CSV to a path or stdout."""

    def __init__(self, out_path: Optional[str] = None):
        self.out_path = out_path
        self.rows: List[ReportRow] = []
        self.logger = logging.getLogger("Report")

    def add(self, rows: Iterable[ReportRow]):
        for row in rows:
            self.rows.append(row)
            status = "ok" if row.passed else "FAILED"
            self.logger.info(f"{row.experiment}/{row.operation}: value={row.value:.6g} slack={row.slack:.3g} {status}")

    @property
    def all_passed(self) -> bool:
        return all(row.passed for row in self.rows)

    def write(self):
        self.write_table(ROW_COLUMNS, [row.as_list() for row in self.rows])

    def write_table(self, header: Sequence[str], rows: Iterable[Sequence]):
        if self.out_path:
            with open(self.out_path, "w", newline="", encoding="utf-8") as f:
                self._dump(f, header, rows)
            self.logger.info(f"Wrote {self.out_path}")
        else:
            self._dump(sys.stdout, header, rows)

    @staticmethod
    def _dump(stream, header: Sequence[str], rows: Iterable[Sequence]):
        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt_value(v) for v in row])

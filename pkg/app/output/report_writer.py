import csv
import io
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Iterable, List, Sequence, Union

from app.analysis.complexity import CostRow, format_sci


@dataclass
class ExperimentRow:
    n: int
    m: int
    t: int
    k: int
    exp_prob: str
    P: str
    d_max: int
    avg_seconds: str = ""
    memory_mb: str = ""


TIMING_COLUMNS = ("avg_seconds", "memory_mb")
TABLE3_HEADER = ("n", "2^{n/2}", "m", "stage1", "stage2")


def experiment_csv(rows: Iterable[ExperimentRow], include_timing: bool = False) -> str:
    """Header row then one row per experiment; timing columns only on request."""
    columns = [f.name for f in fields(ExperimentRow)
               if include_timing or f.name not in TIMING_COLUMNS]
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=columns, lineterminator="\n", extrasaction="ignore")
    writer.writeheader()
    for row in rows:
        writer.writerow(asdict(row))
    return buffer.getvalue()


def table3_csv(rows: Sequence[CostRow]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(TABLE3_HEADER)
    for row in rows:
        writer.writerow([row.n, format_sci(row.pollard), row.m, format_sci(row.stage1), format_sci(row.stage2)])
    return buffer.getvalue()


def read_csv(text: str) -> List[dict]:
    return list(csv.DictReader(io.StringIO(text)))


def save_report(content: str, path: Union[str, Path]) -> Path:
    """Write a report, creating parent directories."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(content, encoding="utf-8")
    print(f"Saved {path}")
    return path

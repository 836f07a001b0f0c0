"""
CSV emission for every table the CLI produces.

Comma separated, '.' decimal point, LF line endings, a header row always,
and floats serialized with 17 significant digits so values round-trip.
"""
import csv
import math
import sys
from contextlib import contextmanager
from pathlib import Path
from typing import Iterable, Iterator, Optional, Sequence, TextIO


def format_value(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if math.isnan(value):
            return ""
        return format(value, ".17g")
    # numpy scalars and anything else numeric
    if hasattr(value, "item"):
        return format_value(value.item())
    return str(value)


def write_table(stream: TextIO, header: Sequence[str], rows: Iterable[Sequence]) -> int:
    """Write header and rows; returns the number of data rows written."""
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(header)
    count = 0
    for row in rows:
        writer.writerow([format_value(v) for v in row])
        count += 1
    return count


@contextmanager
def open_output(path: Optional[str]) -> Iterator[TextIO]:
    """Yield a text stream for `path`, or stdout when path is None or '-'."""
    if path is None or path == "-":
        yield sys.stdout
        sys.stdout.flush()
        return
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    with open(target, "w", newline="", encoding="utf-8") as f:
        yield f

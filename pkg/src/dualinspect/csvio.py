"""Strict CSV reading and writing for count data.

Files are UTF-8, comma separated, with a required header (``r1,r2`` or
``x1,x2,y``). Every field must be a nonnegative decimal integer. Blank lines
are skipped; anything else that does not parse is an error carrying the
1-based line number.
"""

import csv
import io
import re

from .model import CountSample, FullCountSample

__all__ = ["CsvFormatError", "PAIR_HEADER", "TRIPLE_HEADER", "read_columns",
           "read_pairs", "read_triples", "write_pairs", "write_triples"]

PAIR_HEADER = ("r1", "r2")
TRIPLE_HEADER = ("x1", "x2", "y")
_INT = re.compile(r"[0-9]+")


class CsvFormatError(ValueError):
    """Malformed input; ``errors`` lists ``(line, message)`` pairs."""

    def __init__(self, errors):
        self.errors = list(errors)
        lines = "; ".join(f"line {n}: {msg}" for n, msg in self.errors[:20])
        more = f" (+{len(self.errors) - 20} more)" if len(self.errors) > 20 else ""
        super().__init__(lines + more)


def read_columns(text: str, header: tuple) -> list:
    """Parse ``text`` into one list of ints per header column."""
    if text.startswith("\ufeff"):
        text = text[1:]
    rows = list(csv.reader(io.StringIO(text)))
    errors = []
    cols = [[] for _ in header]
    seen_header = False
    for lineno, row in enumerate(rows, start=1):
        if not row:
            continue
        if not seen_header:
            seen_header = True
            if tuple(row) != header:
                raise CsvFormatError([(lineno, f"expected header {','.join(header)!r}, "
                                               f"got {','.join(row)!r}")])
            continue
        if len(row) != len(header):
            errors.append((lineno, f"expected {len(header)} fields, got {len(row)}"))
            continue
        for j, value in enumerate(row):
            if not _INT.fullmatch(value):
                errors.append((lineno, f"field {header[j]!r} is not a nonnegative integer: {value!r}"))
                break
        else:
            for j, value in enumerate(row):
                cols[j].append(int(value))
    if not seen_header:
        raise CsvFormatError([(1, f"missing header {','.join(header)!r}")])
    if errors:
        raise CsvFormatError(errors)
    return cols


def _read_text(path) -> str:
    with open(path, encoding="utf-8", newline="") as fh:
        return fh.read()


def read_pairs(path) -> CountSample:
    return CountSample(*read_columns(_read_text(path), PAIR_HEADER))


def read_triples(path) -> FullCountSample:
    return FullCountSample(*read_columns(_read_text(path), TRIPLE_HEADER))


def _write(path, header, columns):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in zip(*columns):
            fh.write(",".join(str(int(v)) for v in row) + "\n")


def write_pairs(sample: CountSample, path) -> None:
    _write(path, PAIR_HEADER, (sample.r1, sample.r2))


def write_triples(sample: FullCountSample, path) -> None:
    _write(path, TRIPLE_HEADER, (sample.x1, sample.x2, sample.y))

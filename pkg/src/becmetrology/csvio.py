"""CSV/JSON emission with provenance headers and atomic replacement."""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile


def atomic_write_text(path, text: str) -> None:
    """Write via a sibling temporary file and rename, so readers never see halves."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", text=True)
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_csv(path, fieldnames, rows, header_lines=()) -> None:
    """Write rows (sequences or mappings) with '#'-prefixed provenance lines on top."""
    buf = io.StringIO()
    for line in header_lines:
        buf.write(f"# {line}\n")
    writer = csv.writer(buf)
    writer.writerow(fieldnames)
    for row in rows:
        if isinstance(row, dict):
            writer.writerow([row[name] for name in fieldnames])
        else:
            writer.writerow(list(row))
    atomic_write_text(path, buf.getvalue())


def read_csv(path):
    """Read back a file written by write_csv: (header_lines, fieldnames, rows-as-dicts)."""
    header_lines = []
    with open(path, newline="") as fh:
        data_lines = []
        for line in fh:
            if line.startswith("#"):
                header_lines.append(line[1:].strip())
            else:
                data_lines.append(line)
    reader = csv.reader(data_lines)
    fieldnames = next(reader)
    rows = [dict(zip(fieldnames, row)) for row in reader]
    return header_lines, fieldnames, rows


def write_json(path, payload) -> None:
    atomic_write_text(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")

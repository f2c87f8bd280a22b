"""CSV emission shared by the command-line tools."""

import csv
import hashlib
import json
from pathlib import Path

import numpy as np

SIGNIFICANT_DIGITS = 12


class OutputExistsError(FileExistsError):
    pass


def format_number(x):
    """Positional decimal with 12 significant digits; inf/nan spelled out."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, str):
        return x
    if isinstance(x, (complex, np.complexfloating)):
        return f"{format_number(x.real)}{'+' if x.imag >= 0 else '-'}{format_number(abs(x.imag))}j"
    x = float(x)
    if not np.isfinite(x):
        return "nan" if np.isnan(x) else ("inf" if x > 0 else "-inf")
    return np.format_float_positional(x, precision=SIGNIFICANT_DIGITS, unique=False,
                                      fractional=False, trim="-")


def config_hash(settings):
    """Short SHA-256 of a settings mapping, independent of key order."""
    blob = json.dumps(settings, sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def check_writable(paths, force=False):
    existing = [str(p) for p in paths if Path(p).exists()]
    if existing and not force:
        raise OutputExistsError(f"refusing to overwrite {', '.join(existing)} (use --force)")


def write_csv(path, columns, rows, comments=(), force=False):
    path = Path(path)
    check_writable([path], force)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        for line in comments:
            fh.write(f"# {line}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([format_number(v) for v in row])
    return path


def read_csv(path):
    """Parse a file written by :func:`write_csv` into (comments, columns, rows)."""
    comments, lines = [], []
    with Path(path).open() as fh:
        for line in fh:
            if line.startswith("#"):
                comments.append(line[1:].strip())
            else:
                lines.append(line)
    reader = csv.reader(lines)
    columns = next(reader)
    return comments, columns, [row for row in reader]

"""CSV and JSON writers with reproducible metadata headers.

Numbers are written with 12 significant digits, infinities as ``inf``.
Files carry no timestamps, so identical inputs give identical bytes.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
from pathlib import Path

import numpy as np

UNITS = "time us; frequency MHz (ordinary); angle rad"


def fmt(value) -> str:
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return str(int(value))
    return f"{float(value):.12g}"


def _plain(obj):
    """Convert to JSON-safe builtins; non-finite floats become strings."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else fmt(v)
    return obj


def canonical_json(obj) -> str:
    return json.dumps(_plain(obj), sort_keys=True, separators=(",", ":"))


def config_hash(config: dict) -> str:
    """sha1 of the canonical config JSON, hashed the way git hashes a blob."""
    body = canonical_json(config).encode()
    return hashlib.sha1(b"blob %d\0" % len(body) + body).hexdigest()


def metadata(command: str, config: dict, **extra) -> dict:
    from . import __version__

    meta = {
        "tool": "sagqg",
        "version": __version__,
        "command": command,
        "config": config,
        "config_sha1": config_hash(config),
        "units": UNITS,
    }
    meta.update(extra)
    return meta


def write_csv(path, columns: dict, meta: dict | None = None) -> Path:
    """Write equal-length columns; ``meta`` goes into ``# key: value`` lines."""
    path = Path(path)
    names = list(columns)
    data = [np.asarray(columns[n]).ravel() for n in names]
    if len({len(d) for d in data}) > 1:
        raise ValueError("CSV columns differ in length")
    with path.open("w", newline="") as fh:
        for key, value in (meta or {}).items():
            text = value if isinstance(value, str) else canonical_json(value)
            fh.write(f"# {key}: {text}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(names)
        for row in zip(*data):
            writer.writerow([fmt(v) for v in row])
    return path


def read_csv(path) -> tuple[dict, dict[str, np.ndarray]]:
    """Inverse of :func:`write_csv` for numeric columns."""
    meta, lines = {}, []
    with Path(path).open() as fh:
        for line in fh:
            if line.startswith("# "):
                key, _, value = line[2:].rstrip("\n").partition(": ")
                meta[key] = value
            else:
                lines.append(line)
    rows = list(csv.reader(lines))
    header, body = rows[0], rows[1:]
    cols = {name: np.array([float(r[i]) for r in body]) for i, name in enumerate(header)}
    return meta, cols


def write_json(path, payload: dict, meta: dict | None = None) -> Path:
    path = Path(path)
    doc = {"metadata": meta or {}, **payload}
    path.write_text(json.dumps(_plain(doc), sort_keys=True, indent=2) + "\n")
    return path

"""Plain-text formats: CSV tables, matrices, masks and key = value configs."""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .refinable import Mask


def fmt(v) -> str:
    """Shortest round-trip text for a number (``repr`` of the float)."""
    if v is None:
        return ""
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    return repr(float(v))


def write_csv(path, header, rows) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) if not isinstance(v, str) else v for v in row])
    return path


def read_csv(path) -> tuple[list, np.ndarray]:
    with Path(path).open(newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValueError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    body = [r for r in rows[1:] if r and any(c.strip() for c in r)]
    data = np.array([[float(c) for c in r] for r in body], dtype=float).reshape(len(body), len(header))
    return header, data


def write_grid(path, points, values) -> Path:
    """Grid output ``x[,y],value``."""
    pts = np.asarray(points, dtype=float).reshape(len(values), -1)
    header = ["x", "value"] if pts.shape[1] == 1 else ["x", "y", "value"]
    return write_csv(path, header, (list(p) + [v] for p, v in zip(pts, np.asarray(values, dtype=float))))


def write_samples(path, nodes, values=None) -> Path:
    """Samples file ``x[,y],value``; node-only files omit the value column."""
    pts = np.asarray(nodes, dtype=float)
    pts = pts.reshape(len(pts), -1)
    header = ["x"] if pts.shape[1] == 1 else ["x", "y"]
    if values is None:
        return write_csv(path, header, (list(p) for p in pts))
    return write_csv(path, header + ["value"], (list(p) + [v] for p, v in zip(pts, values)))


def read_samples(path, d: int):
    """Return ``(nodes, values)``; ``values`` is ``None`` for node-only files."""
    header, data = read_csv(path)
    coords = ["x"] if d == 1 else ["x", "y"]
    if header[:d] != coords:
        raise ValueError(f"{path}: expected columns {coords} first, got {header}")
    if len(header) == d:
        return data, None
    if len(header) == d + 1 and header[d] == "value":
        return data[:, :d], data[:, d]
    raise ValueError(f"{path}: unexpected columns {header}")


def write_history(path, history) -> Path:
    return write_csv(path, ["iter", "sup_residual"], enumerate(history))


def write_matrix(path, A, bandwidth: int | None = None) -> Path:
    """Header ``rows cols bandwidth`` then entries row-major.

    With ``bandwidth`` given only entries with ``|r - c| <= bandwidth`` are
    written, one row per line.
    """
    A = A.toarray() if sp.issparse(A) else np.asarray(A, dtype=float)
    rows, cols = A.shape
    bw = -1 if bandwidth is None else int(bandwidth)
    lines = [f"{rows} {cols} {bw}"]
    for r in range(rows):
        lo, hi = (0, cols) if bw < 0 else (max(0, r - bw), min(cols, r + bw + 1))
        lines.append(" ".join(fmt(v) for v in A[r, lo:hi]))
    Path(path).write_text("\n".join(lines) + "\n")
    return Path(path)


def read_matrix(path) -> np.ndarray:
    lines = Path(path).read_text().splitlines()
    rows, cols, bw = (int(v) for v in lines[0].split())
    A = np.zeros((rows, cols))
    for r in range(rows):
        vals = [float(v) for v in lines[1 + r].split()]
        lo = 0 if bw < 0 else max(0, r - bw)
        A[r, lo : lo + len(vals)] = vals
    return A


def write_mask(path, mask: Mask) -> Path:
    Path(path).write_text(mask.to_record() + "\n")
    return Path(path)


def read_mask(path) -> Mask:
    lines = [ln for ln in Path(path).read_text().splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if len(lines) != 1:
        raise ValueError(f"{path}: expected exactly one mask record")
    return Mask.from_record(lines[0])


def read_config(path) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ValueError(f"{path}:{lineno}: empty key")
        out[key] = value
    return out

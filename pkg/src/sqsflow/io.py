"""Bit-stable CSV tables, OBJ meshes and JSON manifests."""

from __future__ import annotations

import csv
import hashlib
import json
from pathlib import Path

import numpy as np


def _fmt(value) -> str:
    # repr of a Python float is the shortest string that round-trips
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def write_csv(path, columns: dict) -> int:
    """Write equal-length columns with a header row and LF endings; returns the row count."""
    path = Path(path)
    names = list(columns)
    data = [np.asarray(columns[k]).ravel() for k in names]
    lengths = {len(d) for d in data}
    if len(lengths) > 1:
        raise ValueError(f"columns differ in length: { {k: len(d) for k, d in zip(names, data)} }")
    n = lengths.pop() if lengths else 0
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(",".join(names) + "\n")
        for i in range(n):
            fh.write(",".join(_fmt(d[i].item() if hasattr(d[i], "item") else d[i]) for d in data) + "\n")
    return n


def read_csv(path) -> dict[str, np.ndarray]:
    """Columns of a CSV written by :func:`write_csv`; numeric columns come back as float arrays."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    out = {}
    for j, name in enumerate(header):
        col = [r[j] for r in body]
        try:
            out[name] = np.array([float(v) for v in col])
        except ValueError:
            out[name] = np.array(col)
    return out


def write_obj(path, vertices: np.ndarray, normals: np.ndarray, faces: np.ndarray) -> int:
    """Wavefront OBJ with per-vertex normals; ``faces`` are 0-based index tuples."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        for v in vertices.reshape(-1, 3):
            fh.write("v " + " ".join(_fmt(c) for c in v) + "\n")
        for n in normals.reshape(-1, 3):
            fh.write("vn " + " ".join(_fmt(c) for c in n) + "\n")
        for f in faces:
            fh.write("f " + " ".join(f"{i + 1}//{i + 1}" for i in f) + "\n")
    return len(faces)


def sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def write_json(path, payload) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_json(path):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)

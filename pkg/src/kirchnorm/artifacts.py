"""On-disk artifacts of a run: fields, sidecars, tabular scans and the manifest.

A scan is stored once as ``<name>.scan.json`` (kind, ordered columns, data)
and rendered to CSV and/or JSON tables; :func:`export_scan` converts a stored
scan later.
"""

from __future__ import annotations

import csv
import json
import math
import platform
from importlib import metadata
from pathlib import Path

import numpy as np

from . import __version__, kfld

# kind -> required columns, in output order
SCAN_KINDS = {
    "phi_scan": ("t", "phi", "psi"),
    "fiber_curve": ("t", "energy"),
    "path": ("t", "energy"),
    "lattice": ("y1", "y2", "y3", "s", "energy"),
    "profile": ("x", "u"),
}


def _clean(obj):
    """JSON-safe copy: numpy scalars/arrays become Python values, non-finite floats become strings."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else repr(x)
    return obj


def write_json(path: Path, payload) -> Path:
    path = Path(path)
    path.write_text(json.dumps(_clean(payload), indent=2, sort_keys=False) + "\n")
    return path


def versions() -> dict:
    out = {"kirchnorm": __version__, "python": platform.python_version()}
    for dist in ("numpy", "scipy", "matplotlib"):
        try:
            out[dist] = metadata.version(dist)
        except metadata.PackageNotFoundError:
            out[dist] = None
    return out


def write_solution(out: Path, name: str, sol, seed: int | None = None) -> list[Path]:
    """``<name>.kfld`` plus the ``<name>.json`` sidecar."""
    out = Path(out)
    field_path = out / f"{name}.kfld"
    kfld.write(field_path, sol.field)
    side = sol.summary()
    side.update(seed=seed, field_file=field_path.name, grid={
        "dim": sol.field.grid.dim, "half_width": sol.field.grid.half_width,
        "points_per_dim": sol.field.grid.points_per_dim,
    })
    return [field_path, write_json(out / f"{name}.json", side)]


def _rows(kind: str, data: dict) -> list[list[float]]:
    cols = SCAN_KINDS[kind]
    n = len(data[cols[-1]])
    return [[data[c][i] for c in cols] for i in range(n)]


def _write_csv(path: Path, kind: str, data: dict) -> Path:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(SCAN_KINDS[kind])
        for row in _rows(kind, data):
            writer.writerow([repr(float(x)) for x in row])
    return path


def _write_table_json(path: Path, kind: str, data: dict) -> Path:
    return write_json(path, {"kind": kind, "columns": list(SCAN_KINDS[kind]),
                             "rows": _rows(kind, data)})


def lattice_columns(lattice: dict, dim: int) -> dict:
    """Pad lattice points to three coordinates for the fixed y1,y2,y3 header."""
    y = np.asarray(lattice["y"], dtype=float).reshape(-1, dim)
    pad = np.zeros((y.shape[0], 3))
    pad[:, :dim] = y
    return {"y1": pad[:, 0], "y2": pad[:, 1], "y3": pad[:, 2], "s": np.asarray(lattice["s"]),
            "energy": np.asarray(lattice["energy"]), "boundary": np.asarray(lattice["boundary"], dtype=bool)}


def write_scan(out: Path, name: str, kind: str, data: dict, formats=("csv", "json"), meta: dict | None = None
               ) -> list[Path]:
    if kind not in SCAN_KINDS:
        raise ValueError(f"unknown scan kind {kind!r}")
    missing = [c for c in SCAN_KINDS[kind] if c not in data]
    if missing:
        raise ValueError(f"scan {kind!r} lacks columns {missing}")
    out = Path(out)
    data = {k: np.asarray(v).tolist() for k, v in data.items()}
    stored = write_json(out / f"{name}.scan.json", {"kind": kind, "data": data, "meta": meta or {}})
    paths = [stored]
    if "csv" in formats:
        paths.append(_write_csv(out / f"{name}.csv", kind, data))
    if "json" in formats:
        paths.append(_write_table_json(out / f"{name}.json", kind, data))
    return paths


def read_scan(path) -> tuple[str, dict]:
    """(kind, columns) from a stored scan or from a CSV whose header names a known kind."""
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"no such artifact: {path}")
    if path.suffix == ".csv":
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        header = tuple(rows[0]) if rows else ()
        kind = next((k for k, cols in SCAN_KINDS.items() if cols == header), None)
        if kind is None:
            raise ValueError(f"unknown artifact type: CSV header {header} in {path}")
        return kind, {c: [float(r[i]) for r in rows[1:]] for i, c in enumerate(header)}
    try:
        blob = json.loads(path.read_text())
    except (json.JSONDecodeError, UnicodeDecodeError):
        raise ValueError(f"unknown artifact type: {path} is not a stored scan") from None
    kind = blob.get("kind") if isinstance(blob, dict) else None
    if kind not in SCAN_KINDS:
        raise ValueError(f"unknown artifact type {kind!r} in {path}")
    if "data" in blob:
        return kind, blob["data"]
    cols = blob["columns"]
    return kind, {c: [r[i] for r in blob["rows"]] for i, c in enumerate(cols)}


def export_scan(artifact, fmt: str, out=None) -> Path:
    """Convert a stored scan to ``csv`` or ``json``; returns the written path."""
    if fmt not in ("csv", "json"):
        raise ValueError(f"format must be csv or json, got {fmt!r}")
    artifact = Path(artifact)
    kind, data = read_scan(artifact)
    if out is None:
        stem = artifact.name.removesuffix(".scan.json").removesuffix(".csv").removesuffix(".json")
        out = artifact.with_name(f"{stem}.export.{fmt}")
    out = Path(out)
    return _write_csv(out, kind, data) if fmt == "csv" else _write_table_json(out, kind, data)


def write_manifest(out: Path, *, command: str, config, seed: int, wall_time: float, status: str,
                   results: dict, artifacts: list, error: dict | None = None) -> Path:
    from .config import render

    payload = {
        "command": command,
        "status": status,
        "seed": seed,
        "wall_time_s": wall_time,
        "versions": versions(),
        "config": config.to_dict() if config is not None else None,
        "config_text": render(config) if config is not None else None,
        "results": results,
        "artifacts": sorted({Path(a).name for a in artifacts}),
    }
    if error is not None:
        payload["error"] = error
    return write_json(Path(out) / "manifest.json", payload)

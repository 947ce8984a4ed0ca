"""File formats: dataset manifests, sample CSVs, score matrices, relation lists.

All floats are written with 17 significant digits so a write/read cycle
reproduces the binary value exactly. Files are written atomically
(temporary file in the target directory, then ``os.replace``).
"""
from __future__ import annotations

import csv
import io as _io
import json
import os
import tempfile
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from .core import CONTROL, Condition, DataError, ExperimentDataset, RelationSet, ScoreMatrix, canonical_pair


def fmt(x: float) -> str:
    return format(float(x), ".17g")


def atomic_write_text(path: str | os.PathLike, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_json(path, obj) -> None:
    atomic_write_text(path, json.dumps(obj, indent=2, sort_keys=True) + "\n")


def write_rows(path, header: Iterable[str] | None, rows: Iterable[Iterable]) -> None:
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if header is not None:
        w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])
    atomic_write_text(path, buf.getvalue())


# ---------------------------------------------------------------------------
# Sample matrices and datasets


def read_sample_csv(path: str | os.PathLike, label: str | None = None) -> np.ndarray:
    """Read a header-less comma-separated sample file, one sample per row."""
    label = label or str(path)
    rows = []
    width = None
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise DataError(f"{label}: cannot open {path}: {exc.strerror}") from None
    with fh:
        for r, line in enumerate(csv.reader(fh)):
            if not line or all(not c.strip() for c in line):
                continue
            try:
                vals = [float(c) for c in line]
            except ValueError:
                raise DataError(f"{label}: malformed value in {path}, row {r}") from None
            if not all(np.isfinite(vals)):
                raise DataError(f"{label}: non-finite value in {path}, row {r}")
            if width is None:
                width = len(vals)
            elif len(vals) != width:
                raise DataError(f"{label}: row {r} of {path} has {len(vals)} columns, expected {width}")
            rows.append(vals)
    if not rows:
        raise DataError(f"{label}: {path} contains no samples")
    return np.array(rows, dtype=np.float64)


def write_sample_csv(path, data: np.ndarray) -> None:
    write_rows(path, None, (list(map(float, row)) for row in np.asarray(data)))


def dataset_load(path: str | os.PathLike) -> ExperimentDataset:
    """Load a dataset from a JSON manifest listing per-condition CSV files."""
    path = Path(path)
    if path.is_dir():
        path = path / "manifest.json"
    try:
        manifest = json.loads(path.read_text())
    except OSError as exc:
        raise DataError(f"cannot read manifest {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise DataError(f"manifest {path} is not valid JSON: {exc}") from None
    for key in ("n_perturbations", "conditions"):
        if key not in manifest:
            raise DataError(f"manifest {path} lacks '{key}'")
    samples: dict[Condition, np.ndarray] = {}
    for rec in manifest["conditions"]:
        cond = Condition.from_record(rec)
        if cond in samples:
            raise DataError(f"duplicate condition {cond} in manifest")
        if "file" not in rec:
            raise DataError(f"condition {cond} has no 'file'")
        samples[cond] = read_sample_csv(path.parent / rec["file"], str(cond))
    if CONTROL not in samples:
        raise DataError("control condition absent")
    dim = manifest.get("dim")
    if dim is not None:
        for cond, arr in samples.items():
            if arr.shape[1] != dim:
                raise DataError(f"{cond}: dimension {arr.shape[1]} differs from manifest dim {dim}")
    names = manifest.get("names")
    meta = {k: v for k, v in manifest.items() if k not in ("n_perturbations", "dim", "conditions", "names")}
    if "ground_truth_pairs" in meta:
        meta["ground_truth_pairs"] = [canonical_pair(*p) for p in meta["ground_truth_pairs"]]
    return ExperimentDataset(
        int(manifest["n_perturbations"]), samples, tuple(names) if names else None, meta
    )


def condition_filename(cond: Condition) -> str:
    if cond.rank == 0:
        return "control.csv"
    if cond.rank == 1:
        return f"single_{cond.i}.csv"
    return f"double_{cond.i}_{cond.j}.csv"


def dataset_save(ds: ExperimentDataset, out_dir: str | os.PathLike) -> Path:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    records = []
    for cond in ds.conditions:
        fname = condition_filename(cond)
        write_sample_csv(out_dir / fname, ds[cond])
        records.append({**cond.to_record(), "file": fname})
    manifest = {"n_perturbations": ds.n_perturbations, "dim": ds.dim, "conditions": records}
    if ds.names:
        manifest["names"] = list(ds.names)
    for k, v in ds.metadata.items():
        manifest[k] = [list(p) for p in v] if k == "ground_truth_pairs" else v
    write_json(out_dir / "manifest.json", manifest)
    return out_dir / "manifest.json"


# ---------------------------------------------------------------------------
# Score matrices


def write_score_matrix(path, matrix: ScoreMatrix) -> None:
    """Header of indices, then n rows; only the strict upper triangle is filled."""
    obs = matrix.observed()
    rows = []
    for i in range(matrix.n):
        rows.append([fmt(obs[(i, j)]) if j > i and (i, j) in obs else "" for j in range(matrix.n)])
    write_rows(path, [str(i) for i in range(matrix.n)], rows)


def read_score_matrix(path, n: int | None = None) -> ScoreMatrix:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise DataError(f"{path}: empty score matrix file")
    header, body = rows[0], rows[1:]
    size = len(header)
    if n is not None and size != n:
        raise DataError(f"{path}: matrix has dimension {size}, expected {n}")
    if len(body) != size or any(len(r) != size for r in body):
        raise DataError(f"{path}: dimension mismatch, expected {size} rows of {size} cells")
    entries: dict = {}
    for i, row in enumerate(body):
        for j, cell in enumerate(row):
            cell = cell.strip()
            if not cell:
                continue
            if i == j:
                raise DataError(f"{path}: diagonal entry ({i}, {i}) must be blank")
            try:
                v = float(cell)
            except ValueError:
                raise DataError(f"{path}: malformed value at ({i}, {j})") from None
            if not np.isfinite(v):
                raise DataError(f"{path}: non-finite value at ({i}, {j})")
            key = canonical_pair(i, j)
            if key in entries and entries[key] != v:
                raise DataError(f"{path}: asymmetric entry at {key}")
            entries[key] = v
    return ScoreMatrix(size, entries)


# ---------------------------------------------------------------------------
# Relations


def read_relations(path) -> RelationSet:
    pairs = []
    with open(path) as fh:
        for ln, line in enumerate(fh):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = [p.strip() for p in line.split(",")]
            try:
                i, j = (int(p) for p in parts)
            except ValueError:
                raise DataError(f"{path}: line {ln} is not an 'i,j' pair") from None
            pairs.append((i, j))
    return RelationSet(pairs)


def write_relations(path, relations: RelationSet) -> None:
    atomic_write_text(path, "".join(f"{i},{j}\n" for i, j in sorted(relations)))


def load_json(path) -> Mapping:
    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise DataError(f"{path} is not valid JSON: {exc}") from None

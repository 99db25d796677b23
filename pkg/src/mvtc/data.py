"""Multi-view dataset container, synthetic data, and file (de)serialization.

Two on-disk matrix formats:

* ``csv`` -- comma-separated, optional header row, ``%.17g`` floats (so a
  save/load round trip is bit-exact).  Rows are samples by default; the
  manifest ``orientation`` field flips that.
* ``bin`` -- 8-byte magic ``MVTCBIN1``, then two little-endian uint64
  (rows, cols), then rows*cols little-endian float64 in row-major order.

A dataset is described by a JSON manifest::

    {
      "name": "blobs",
      "n_clusters": 5,
      "labels_path": "labels.csv",
      "views": [
        {"path": "view_0.csv", "format": "csv", "orientation": "samples"},
        {"path": "view_1.bin", "format": "bin", "orientation": "features"}
      ]
    }

Paths are relative to the manifest's directory; ``labels_path`` and
``n_clusters`` are optional.  Orientation ``"samples"`` means rows are
samples (the matrix is transposed to features x samples on load).
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DimensionMismatch, MissingFile, ParseError, ValidationError

BIN_MAGIC = b"MVTCBIN1"
_ORIENTATIONS = ("samples", "features")


@dataclass
class MultiViewDataset:
    views: list[np.ndarray]          # feature-major, (D_v, N)
    labels: np.ndarray | None = None
    n_clusters: int | None = None
    name: str = "dataset"

    @property
    def n_samples(self) -> int:
        return int(self.views[0].shape[1])

    @property
    def n_views(self) -> int:
        return len(self.views)


def generate_synthetic(
    n_samples: int,
    n_clusters: int,
    n_views: int,
    dims: list[int],
    noise: float,
    seed: int,
    name: str = "synthetic",
) -> MultiViewDataset:
    """Cluster-structured multi-view data from shared latent centers.

    Each cluster owns one latent center; every view applies its own seeded
    random linear map and adds Gaussian noise of the given scale.  Center
    directions are random but their norms form a strict ladder (2, 3, ...),
    so orderings keyed on feature norms group the clusters contiguously;
    the emitted sample order is shuffled.  With ``noise=0`` all
    same-cluster columns of a view are identical.
    """
    if len(dims) != n_views:
        raise ValidationError(f"got {len(dims)} dims for {n_views} views")
    if not 1 <= n_clusters <= n_samples:
        raise ValidationError(f"cannot split {n_samples} samples into {n_clusters} clusters")
    rng = np.random.default_rng(seed)
    latent_dim = max(2, n_clusters)
    centers = rng.standard_normal((latent_dim, n_clusters))
    centers /= np.linalg.norm(centers, axis=0)
    centers *= 1.0 + np.arange(1, n_clusters + 1)
    labels = np.repeat(np.arange(n_clusters), -(-n_samples // n_clusters))[:n_samples]
    rng.shuffle(labels)
    views = []
    for d in dims:
        mix = rng.standard_normal((d, latent_dim)) / np.sqrt(latent_dim)
        x = mix @ centers[:, labels]
        if noise > 0:
            x = x + noise * rng.standard_normal(x.shape)
        views.append(x)
    return MultiViewDataset(views=views, labels=labels, n_clusters=n_clusters, name=name)


def save_dataset(dataset: MultiViewDataset, out_dir, fmt: str = "csv") -> Path:
    """Write views, labels, and a manifest into ``out_dir``; returns the manifest path."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    ext = {"csv": "csv", "bin": "bin"}[fmt]
    entries = []
    for i, view in enumerate(dataset.views):
        rel = f"view_{i}.{ext}"
        write_matrix(out_dir / rel, view, fmt=fmt, orientation="features")
        entries.append({"path": rel, "format": fmt, "orientation": "features"})
    manifest: dict = {"name": dataset.name, "views": entries}
    if dataset.n_clusters is not None:
        manifest["n_clusters"] = int(dataset.n_clusters)
    if dataset.labels is not None:
        labels_rel = "labels.csv"
        np.savetxt(out_dir / labels_rel, dataset.labels, fmt="%d")
        manifest["labels_path"] = labels_rel
    manifest_path = out_dir / "manifest.json"
    manifest_path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return manifest_path


def load_dataset(manifest_path) -> MultiViewDataset:
    """Load every view named by a manifest and cross-validate sample counts."""
    manifest_path = Path(manifest_path)
    if not manifest_path.exists():
        raise MissingFile(f"manifest not found: {manifest_path}")
    try:
        manifest = json.loads(manifest_path.read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(f"manifest {manifest_path} is not valid JSON: {exc}") from exc
    entries = manifest.get("views")
    if not entries:
        raise ValidationError(f"manifest {manifest_path} declares no views")
    base = manifest_path.parent
    views, names = [], []
    for entry in entries:
        path = base / entry["path"]
        fmt = entry.get("format", "csv")
        orientation = entry.get("orientation", "samples")
        views.append(load_matrix(path, fmt=fmt, orientation=orientation))
        names.append(str(entry["path"]))
    counts = [v.shape[1] for v in views]
    if len(set(counts)) > 1:
        detail = ", ".join(f"'{p}' has {c} samples" for p, c in zip(names, counts))
        raise DimensionMismatch(f"views disagree on the sample count: {detail}")
    labels = None
    if manifest.get("labels_path"):
        labels_path = base / manifest["labels_path"]
        labels = _load_labels(labels_path)
        if labels.size != counts[0]:
            raise DimensionMismatch(
                f"labels file '{manifest['labels_path']}' has {labels.size} entries, "
                f"expected {counts[0]}"
            )
    n_clusters = manifest.get("n_clusters")
    return MultiViewDataset(
        views=views,
        labels=labels,
        n_clusters=int(n_clusters) if n_clusters is not None else None,
        name=str(manifest.get("name", manifest_path.stem)),
    )


def load_matrix(path, fmt: str = "csv", orientation: str = "samples") -> np.ndarray:
    """Read one matrix and orient it to features x samples."""
    path = Path(path)
    if orientation not in _ORIENTATIONS:
        raise ValidationError(f"orientation must be one of {_ORIENTATIONS}, got '{orientation}'")
    if not path.exists():
        raise MissingFile(f"view file not found: {path}")
    if fmt == "csv":
        data = _read_csv_matrix(path)
    elif fmt == "bin":
        data = _read_bin_matrix(path)
    else:
        raise ValidationError(f"unknown matrix format '{fmt}'")
    return data.T if orientation == "samples" else data


def write_matrix(path, data: np.ndarray, fmt: str = "csv", orientation: str = "samples"):
    """Write a features x samples matrix under the given orientation."""
    path = Path(path)
    if orientation not in _ORIENTATIONS:
        raise ValidationError(f"orientation must be one of {_ORIENTATIONS}, got '{orientation}'")
    out = np.asarray(data, dtype=float)
    out = out.T if orientation == "samples" else out
    if fmt == "csv":
        np.savetxt(path, out, fmt="%.17g", delimiter=",")
    elif fmt == "bin":
        rows, cols = out.shape
        with open(path, "wb") as fh:
            fh.write(BIN_MAGIC)
            fh.write(struct.pack("<QQ", rows, cols))
            fh.write(np.ascontiguousarray(out, dtype="<f8").tobytes())
    else:
        raise ValidationError(f"unknown matrix format '{fmt}'")


def _read_csv_matrix(path: Path) -> np.ndarray:
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines:
        raise ParseError(f"{path}: empty file")
    start = 0
    try:
        [float(tok) for tok in lines[0].split(",")]
    except ValueError:
        start = 1  # header row
    width = None
    for ln_no, line in enumerate(lines[start:], start=start + 1):
        try:
            row = [float(tok) for tok in line.split(",")]
        except ValueError as exc:
            raise ParseError(f"{path}:{ln_no}: {exc}") from exc
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise ParseError(
                f"{path}:{ln_no}: expected {width} columns, found {len(row)}"
            )
        rows.append(row)
    if not rows:
        raise ParseError(f"{path}: no data rows")
    return np.asarray(rows, dtype=float)


def _read_bin_matrix(path: Path) -> np.ndarray:
    raw = path.read_bytes()
    header = len(BIN_MAGIC) + 16
    if len(raw) < header or raw[: len(BIN_MAGIC)] != BIN_MAGIC:
        raise ParseError(f"{path}: missing {BIN_MAGIC!r} header")
    rows, cols = struct.unpack("<QQ", raw[len(BIN_MAGIC) : header])
    expected = header + rows * cols * 8
    if len(raw) != expected:
        raise ParseError(
            f"{path}: expected {expected} bytes for a {rows}x{cols} matrix, found {len(raw)}"
        )
    data = np.frombuffer(raw, dtype="<f8", offset=header)
    return data.reshape(rows, cols).astype(float)


def _load_labels(path: Path) -> np.ndarray:
    if not path.exists():
        raise MissingFile(f"labels file not found: {path}")
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    try:
        return np.asarray([int(float(ln)) for ln in lines], dtype=np.int64)
    except ValueError as exc:
        raise ParseError(f"{path}: labels must be integers: {exc}") from exc

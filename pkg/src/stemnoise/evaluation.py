"""Rank correlation of image features against subjective scores.

Features are correlated with the raw scores of each subset; there is no
training and no logistic mapping, so only the Spearman coefficient is
reported.
"""

from __future__ import annotations

import csv
import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ManifestFormatError, UndefinedCorrelationError
from .imageio import load_image
from .pipeline import FEATURES, PipelineConfig, feature_vector

log = logging.getLogger(__name__)

MANIFEST_COLUMNS = ("path", "subset", "dmos")


@dataclass(frozen=True)
class ManifestEntry:
    path: Path
    subset: str
    dmos: float
    label: str = ""


@dataclass(frozen=True)
class DatasetManifest:
    entries: tuple[ManifestEntry, ...]
    source: Path | None = None

    def subsets(self) -> list[str]:
        """Subset names in order of first appearance."""
        return list(dict.fromkeys(e.subset for e in self.entries))

    def by_subset(self, name: str) -> list[ManifestEntry]:
        return [e for e in self.entries if e.subset == name]


def parse_manifest(path) -> DatasetManifest:
    """Read a ``path,subset,dmos`` CSV; relative image paths resolve against the manifest's folder."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8-sig")
    except OSError as exc:
        raise ManifestFormatError(f"{path}: cannot read manifest: {exc}") from exc
    reader = csv.reader(text.splitlines())
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise ManifestFormatError(f"{path}: manifest is empty") from None
    missing = [c for c in MANIFEST_COLUMNS if c not in header]
    if missing:
        raise ManifestFormatError(f"{path}, line 1: missing column(s) {', '.join(missing)}")
    col = {name: header.index(name) for name in MANIFEST_COLUMNS}

    entries = []
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) < len(header):
            raise ManifestFormatError(
                f"{path}, line {lineno}: expected {len(header)} fields, got {len(row)}"
            )
        image = row[col["path"]].strip()
        subset = row[col["subset"]].strip()
        raw = row[col["dmos"]].strip()
        if not image:
            raise ManifestFormatError(f"{path}, line {lineno}: empty image path")
        try:
            dmos = float(raw)
        except ValueError:
            raise ManifestFormatError(
                f"{path}, line {lineno}: cannot parse dmos {raw!r}"
            ) from None
        if not math.isfinite(dmos):
            raise ManifestFormatError(f"{path}, line {lineno}: dmos {raw!r} is not finite")
        image_path = Path(image)
        if not image_path.is_absolute():
            image_path = path.parent / image_path
        entries.append(ManifestEntry(image_path, subset, dmos, image))
    if not entries:
        raise ManifestFormatError(f"{path}: manifest has no entries")
    return DatasetManifest(tuple(entries), path)


def average_ranks(values) -> np.ndarray:
    """1-based ranks; tied values share the mean of the ranks they span."""
    x = np.asarray(values, dtype=np.float64)
    order = np.argsort(x, kind="mergesort")
    sorted_x = x[order]
    ranks = np.empty(x.size, dtype=np.float64)
    start = 0
    n = x.size
    while start < n:
        stop = start + 1
        while stop < n and sorted_x[stop] == sorted_x[start]:
            stop += 1
        # positions start..stop-1 hold ranks start+1..stop
        ranks[order[start:stop]] = (start + 1 + stop) / 2.0
        start = stop
    return ranks


def srocc(x, y) -> float:
    """Spearman rank-order correlation with average ranks for ties."""
    x = np.asarray(x, dtype=np.float64).ravel()
    y = np.asarray(y, dtype=np.float64).ravel()
    if x.size != y.size:
        raise UndefinedCorrelationError(f"length mismatch: {x.size} vs {y.size}")
    if x.size < 2:
        raise UndefinedCorrelationError("at least two pairs are required")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise UndefinedCorrelationError("inputs must be finite")
    rx = average_ranks(x)
    ry = average_ranks(y)
    dx = rx - rx.mean()
    dy = ry - ry.mean()
    sxx = float(np.dot(dx, dx))
    syy = float(np.dot(dy, dy))
    if sxx == 0.0 or syy == 0.0:
        raise UndefinedCorrelationError("correlation is undefined for a constant input")
    rho = float(np.dot(dx, dy)) / math.sqrt(sxx * syy)
    return max(-1.0, min(1.0, rho))


@dataclass
class CorrelationReport:
    """``{subset: {feature: {"srocc": float | None, "n": int}}}``.

    ``srocc`` is None where a feature is constant over the subset. Subsets
    with fewer than two images carry ``{"skipped": reason, "n": count}``.
    """

    subsets: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(self.subsets, indent=2) + "\n"

    def to_text(self) -> str:
        names = list(self.subsets)
        width = max([len(f) for f in FEATURES] + [7])
        cols = [max(len(s), 8) for s in names]
        lines = [
            " " * width + "  " + "  ".join(s.rjust(c) for s, c in zip(names, cols)),
            " " * width + "  " + "  ".join(f"n={self._count(s)}".rjust(c) for s, c in zip(names, cols)),
        ]
        for feat in FEATURES:
            cells = []
            for s, c in zip(names, cols):
                entry = self.subsets[s].get(feat)
                if entry is None or entry["srocc"] is None:
                    cells.append("-".rjust(c))
                else:
                    cells.append(f"{entry['srocc']:+.4f}".rjust(c))
            lines.append(feat.ljust(width) + "  " + "  ".join(cells))
        return "\n".join(lines) + "\n"

    def _count(self, subset: str) -> int:
        block = self.subsets[subset]
        if "n" in block:
            return block["n"]
        return next(iter(block.values()))["n"]


def compute_features(manifest: DatasetManifest, config: PipelineConfig | None = None, workers: int = 1):
    """Feature dictionaries for every manifest entry, in manifest order."""
    config = config or PipelineConfig()

    def one(entry):
        return feature_vector(load_image(entry.path), config)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(one, manifest.entries))
    return [one(e) for e in manifest.entries]


def evaluate_dataset(
    manifest: DatasetManifest, config: PipelineConfig | None = None, workers: int = 1
) -> CorrelationReport:
    features = compute_features(manifest, config, workers)
    report = CorrelationReport()
    for subset in manifest.subsets():
        # canonical order so the floating-point sums ignore manifest row order
        idx = sorted(
            (i for i, e in enumerate(manifest.entries) if e.subset == subset),
            key=lambda i: (str(manifest.entries[i].path), manifest.entries[i].dmos),
        )
        if len(idx) < 2:
            log.warning("subset %r has %d image(s); skipped", subset, len(idx))
            report.subsets[subset] = {"skipped": "fewer than 2 images", "n": len(idx)}
            continue
        dmos = [manifest.entries[i].dmos for i in idx]
        block = {}
        for feat in FEATURES:
            values = [features[i][feat] for i in idx]
            try:
                rho = srocc(values, dmos)
            except UndefinedCorrelationError:
                rho = None
            block[feat] = {"srocc": rho, "n": len(idx)}
        report.subsets[subset] = block
    return report

"""Node-level sample ingestion, partitioning, scaling, and fit metrics.

The canonical on-disk format is a UTF-8 CSV with the exact header
``x,y,z,pressure,air_superficial_velocity,air_volume_fraction`` and one
reactor node per row. Feature staging selects a prefix of the five input
columns; the volume fraction is always the regression target.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace
from enum import Enum
from pathlib import Path

import numpy as np

from .errors import DataError

FEATURE_NAMES = ("x", "y", "z", "pressure", "air_superficial_velocity")
TARGET_NAME = "air_volume_fraction"
CSV_HEADER = FEATURE_NAMES + (TARGET_NAME,)


class FeatureStage(Enum):
    """Nested input stages: the first k of (x, y, z, pressure, velocity)."""

    X1 = 1
    XY2 = 2
    XYZ3 = 3
    XYZP4 = 4
    XYZPV5 = 5

    @property
    def n_features(self) -> int:
        return self.value

    @property
    def feature_names(self) -> tuple[str, ...]:
        return FEATURE_NAMES[: self.value]

    @classmethod
    def from_arity(cls, k: int) -> "FeatureStage":
        for stage in cls:
            if stage.value == k:
                return stage
        raise ValueError(f"feature stage must be 1..5, got {k}")


@dataclass(frozen=True)
class Sample:
    """One reactor node: coordinates, fluid features, and gas volume fraction."""

    x: float
    y: float
    z: float
    pressure: float
    superficial_velocity: float
    volume_fraction: float

    def __post_init__(self):
        values = (self.x, self.y, self.z, self.pressure,
                  self.superficial_velocity, self.volume_fraction)
        if not all(math.isfinite(v) for v in values):
            raise DataError("sample fields must be finite")
        if not 0.0 <= self.volume_fraction <= 1.0:
            raise DataError(
                f"volume_fraction {self.volume_fraction!r} outside [0, 1]")

    def all_features(self) -> tuple[float, ...]:
        return (self.x, self.y, self.z, self.pressure, self.superficial_velocity)


@dataclass(frozen=True)
class DataSet:
    """Ordered samples plus the feature stage they are consumed at."""

    samples: tuple[Sample, ...]
    feature_stage: FeatureStage

    def __len__(self) -> int:
        return len(self.samples)

    def features(self) -> np.ndarray:
        """Feature matrix (n, d) for the dataset's stage."""
        d = self.feature_stage.n_features
        return np.array([s.all_features()[:d] for s in self.samples], dtype=float)

    def targets(self) -> np.ndarray:
        return np.array([s.volume_fraction for s in self.samples], dtype=float)

    def with_stage(self, stage: FeatureStage) -> "DataSet":
        return DataSet(self.samples, stage)


@dataclass(frozen=True)
class EvalReport:
    """Correlation and error statistics of predictions against targets."""

    pearson_r: float
    rmse: float
    mae: float
    n: int


@dataclass(frozen=True)
class Normalizer:
    """Per-feature min-max scaling learned from a training partition.

    Apply exactly once: transformed training features land in [0, 1];
    values outside the fitted range (e.g. test data) are not clipped.
    """

    feature_names: tuple[str, ...]
    mins: np.ndarray
    maxs: np.ndarray

    def transform(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        return (X - self.mins) / (self.maxs - self.mins)


def load_dataset(path: str | Path, stage: FeatureStage) -> DataSet:
    """Read the canonical CSV into a DataSet carrying `stage`.

    Raises DataError on a missing file, header mismatch, malformed or
    incomplete rows (with the offending line number), or an empty body.
    """
    path = Path(path)
    if not path.exists():
        raise DataError(f"dataset file not found: {path}")
    samples = []
    with path.open("r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file, expected header "
                            f"{','.join(CSV_HEADER)}") from None
        if tuple(h.strip() for h in header) != CSV_HEADER:
            raise DataError(f"{path}: header must be exactly "
                            f"{','.join(CSV_HEADER)}, got {','.join(header)}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(CSV_HEADER):
                raise DataError(f"{path}, line {lineno}: expected "
                                f"{len(CSV_HEADER)} columns, got {len(row)}")
            try:
                values = [float(cell) for cell in row]
            except ValueError as exc:
                raise DataError(f"{path}, line {lineno}: {exc}") from None
            try:
                samples.append(Sample(*values))
            except DataError as exc:
                raise DataError(f"{path}, line {lineno}: {exc}") from None
    if not samples:
        raise DataError(f"{path}: no samples")
    return DataSet(tuple(samples), stage)


def write_dataset_csv(data: DataSet, path: str | Path) -> None:
    """Write the canonical CSV (full six-column schema, repr-precision floats)."""
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(CSV_HEADER) + "\n")
        for s in data.samples:
            row = (*s.all_features(), s.volume_fraction)
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def split(data: DataSet, p: float, seed: int) -> tuple[DataSet, DataSet]:
    """Seeded random partition into (train, test) with |train| = round(p*n).

    The split is a seeded uniform permutation followed by a prefix cut, so
    identical (data, p, seed) reproduce identical partitions.
    """
    if not 0.0 < p < 1.0:
        raise ValueError(f"split: train fraction p must be in (0, 1), got {p}")
    n = len(data)
    if n < 2:
        raise ValueError(f"split: need at least 2 samples, got {n}")
    n_train = int(round(p * n))
    order = np.random.default_rng(seed).permutation(n)
    train = tuple(data.samples[i] for i in order[:n_train])
    test = tuple(data.samples[i] for i in order[n_train:])
    stage = data.feature_stage
    return DataSet(train, stage), DataSet(test, stage)


def fit_normalizer(train: DataSet) -> Normalizer:
    """Learn per-feature (min, max) from a training partition.

    A constant feature column cannot be scaled and raises DataError
    naming the feature.
    """
    if len(train) == 0:
        raise ValueError("fit_normalizer: training data is empty")
    X = train.features()
    mins = X.min(axis=0)
    maxs = X.max(axis=0)
    names = train.feature_stage.feature_names
    for j, name in enumerate(names):
        if maxs[j] <= mins[j]:
            raise DataError(f"fit_normalizer: feature '{name}' is constant "
                            f"({mins[j]!r}); cannot scale")
    return Normalizer(names, mins, maxs)


def apply_normalizer(norm: Normalizer, data: DataSet) -> DataSet:
    """Return a copy of `data` with the staged feature columns scaled.

    Non-staged fields and the target are untouched; values outside the
    fitted range map outside [0, 1] and are not clipped.
    """
    d = data.feature_stage.n_features
    if len(norm.feature_names) != d:
        raise ValueError("apply_normalizer: normalizer arity "
                         f"{len(norm.feature_names)} != stage arity {d}")
    scaled = norm.transform(data.features())
    field_names = ("x", "y", "z", "pressure", "superficial_velocity")
    samples = []
    for i, s in enumerate(data.samples):
        updates = {field_names[j]: float(scaled[i, j]) for j in range(d)}
        samples.append(replace(s, **updates))
    return DataSet(tuple(samples), data.feature_stage)


def eval_metrics(pred, target) -> EvalReport:
    """Pearson R, RMSE, and MAE of predictions against targets.

    R is the Pearson correlation cov(pred, target) / (sd_pred * sd_target);
    it is undefined (DataError) when either sequence has zero variance.
    """
    pred = np.asarray(pred, dtype=float)
    target = np.asarray(target, dtype=float)
    if pred.shape != target.shape or pred.ndim != 1:
        raise ValueError("eval_metrics: pred and target must be equal-length "
                         "1-d sequences")
    n = pred.size
    if n < 2:
        raise ValueError(f"eval_metrics: need at least 2 points, got {n}")
    dp = pred - pred.mean()
    dt = target - target.mean()
    sp2 = float(dp @ dp)
    st2 = float(dt @ dt)
    if st2 == 0.0 or sp2 == 0.0:
        raise DataError("eval_metrics: zero-variance input, R undefined")
    r = float(dp @ dt) / math.sqrt(sp2 * st2)
    r = max(-1.0, min(1.0, r))
    err = pred - target
    rmse = float(np.sqrt(np.mean(err ** 2)))
    mae = float(np.mean(np.abs(err)))
    return EvalReport(pearson_r=r, rmse=rmse, mae=mae, n=n)

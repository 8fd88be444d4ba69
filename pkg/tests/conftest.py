import os
from pathlib import Path

import hypothesis
import numpy as np
import pytest

from models import ColumnKind, Dataset, DiscretizedDataset
from models.dataset import infer_kind

np.seterr(all="warn")

hypothesis.settings.register_profile("fast", max_examples=10)
hypothesis.settings.register_profile("ci", max_examples=100, deadline=None)
hypothesis.settings.register_profile("debugger", report_multiple_bugs=False)
hypothesis.settings.load_profile(os.getenv("HYPOTHESIS_PROFILE", "ci"))


def make_ddata(codes, label, name="synthetic") -> DiscretizedDataset:
    """Discretized dataset straight from integer codes (columns already dense)."""
    codes = np.asarray(codes, dtype=np.int64)
    if codes.ndim == 1:
        codes = codes.reshape(-1, 1)
    label = np.asarray(label, dtype=np.int64)
    _, label = np.unique(label, return_inverse=True)
    columns = []
    for j in range(codes.shape[1]):
        _, dense = np.unique(codes[:, j], return_inverse=True)
        columns.append(dense.reshape(-1))
    dense_codes = np.column_stack(columns) if columns else codes
    return DiscretizedDataset(
        name=name,
        feature_names=[f"x{j}" for j in range(codes.shape[1])],
        codes=dense_codes,
        label_codes=label.reshape(-1),
        bin_counts=[int(dense_codes[:, j].max()) + 1 for j in range(codes.shape[1])],
        label_classes=int(np.unique(label).size),
        bin_edges=[None] * codes.shape[1],
        levels=[sorted(float(v) for v in np.unique(codes[:, j])) for j in range(codes.shape[1])],
        label_levels=sorted(float(v) for v in np.unique(label)),
    )


def make_dataset(features, label, name="synthetic", kinds=None) -> Dataset:
    features = np.asarray(features, dtype=np.float64)
    label = np.asarray(label, dtype=np.float64)
    return Dataset(
        name=name,
        feature_names=[f"x{j}" for j in range(features.shape[1])],
        features=features,
        label=label,
        column_kinds=kinds or [infer_kind(features[:, j]) for j in range(features.shape[1])],
        label_kind=ColumnKind.INTEGER,
    )


def function_of_subset(seed: int, n: int, m: int, relevant: int, levels: int = 2):
    """Random features; y is the sum modulo `levels` of `relevant` randomly chosen columns."""
    rng = np.random.default_rng(seed)
    codes = rng.integers(0, levels, size=(n, m))
    chosen = np.sort(rng.choice(m, size=relevant, replace=False))
    label = codes[:, chosen].sum(axis=1) % levels
    return codes, label, [int(j) for j in chosen]


def write_csv(path: Path, header, rows) -> Path:
    lines = [",".join(header)] if header else []
    lines += [",".join(str(value) for value in row) for row in rows]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def separable_csv(tmp_path):
    """Two classes, the first feature separates them; 60 rows, 4 features."""
    rng = np.random.default_rng(3)
    rows = []
    for i in range(60):
        y = i % 2
        rows.append([
            round(10.0 * y + rng.normal(0, 0.3), 4),
            round(float(rng.normal()), 4),
            int(rng.integers(0, 3)),
            int(rng.integers(0, 2)),
            y,
        ])
    return write_csv(tmp_path / "separable.csv", ["a", "b", "c", "d", "y"], rows)

"""Service for loading CSV datasets, discretizing them and splitting train/test."""
import logging
import math
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from models import ColumnKind, Dataset, DiscretizedDataset, SplitSpec
from models.dataset import infer_kind
from models.errors import DataError, EmptyDataset, InvalidFraction, LabelColumnMissing, ParseError
from utils.config import config

logger = logging.getLogger(__name__)

ColumnKey = Union[str, int]


class DataService:
    MISSING_TOKENS = ("", "?")

    def resolve_path(self, path: Union[str, Path]) -> Path:
        """Relative paths that do not exist here are looked up in the data directory."""
        path = Path(path)
        if not path.exists() and not path.is_absolute():
            candidate = config.DATA_DIR / path
            if candidate.exists():
                return candidate
        return path

    @staticmethod
    def _resolve_column(columns: Sequence[str], key: ColumnKey) -> Optional[str]:
        columns = list(columns)
        if isinstance(key, str) and key in columns:
            return key
        if isinstance(key, int) or (isinstance(key, str) and key.isdigit()):
            index = int(key)
            if 0 <= index < len(columns):
                return columns[index]
        return None

    def load_csv(
        self,
        path: Union[str, Path],
        label_column: ColumnKey,
        header: bool = True,
        drop_columns: Sequence[ColumnKey] = (),
        name: Optional[str] = None,
    ) -> Dataset:
        path = self.resolve_path(path)
        if not path.exists():
            raise FileNotFoundError(f"Dataset file not found: {path}")

        try:
            raw = pd.read_csv(
                path,
                header=0 if header else None,
                dtype=str,
                keep_default_na=False,
                skip_blank_lines=False,
                encoding="utf-8",
            ).fillna("")
        except pd.errors.EmptyDataError as e:
            raise EmptyDataset(f"{path} holds no rows") from e
        except pd.errors.ParserError as e:
            raise DataError(f"Malformed CSV {path}: {e}") from e

        if header:
            raw.columns = [str(c).strip() for c in raw.columns]
        else:
            raw.columns = [f"c{j}" for j in range(raw.shape[1])]

        label_name = self._resolve_column(raw.columns, label_column)
        if label_name is None:
            raise LabelColumnMissing(f"Label column {label_column!r} not found in {path}")

        drops = []
        for key in drop_columns:
            column = self._resolve_column(raw.columns, key)
            if column is None:
                raise DataError(f"Column {key!r} to drop not found in {path}")
            if column == label_name:
                raise DataError(f"Cannot drop the label column {column!r}")
            drops.append(column)
        raw = raw.drop(columns=drops)

        cells = raw.apply(lambda column: column.str.strip())
        missing = cells.isin(self.MISSING_TOKENS).any(axis=1).to_numpy()
        first_line = 2 if header else 1
        line_numbers = np.arange(len(cells)) + first_line
        cells = cells.loc[~missing]
        line_numbers = line_numbers[~missing]
        dropped = int(missing.sum())
        if dropped:
            logger.info(f"Dropped {dropped} rows with missing values from {path.name}")

        numeric = cells.apply(pd.to_numeric, errors="coerce")
        bad = ~np.isfinite(numeric.to_numpy(dtype=np.float64))
        if bad.any():
            r, c = np.argwhere(bad)[0]
            raise ParseError(row=int(line_numbers[r]), column=str(cells.columns[c]), value=cells.iat[r, c])

        if numeric.shape[0] == 0:
            raise EmptyDataset(f"No complete rows left in {path} after dropping missing values")

        feature_names = [c for c in numeric.columns if c != label_name]
        features = numeric[feature_names].to_numpy(dtype=np.float64).reshape(numeric.shape[0], len(feature_names))
        label = numeric[label_name].to_numpy(dtype=np.float64)

        dataset = Dataset(
            name=name or path.stem,
            feature_names=feature_names,
            features=features,
            label=label,
            column_kinds=[infer_kind(features[:, j]) for j in range(features.shape[1])],
            label_kind=infer_kind(label),
            dropped_rows=dropped,
        )
        logger.info(f"Loaded {dataset.name}: n={dataset.n}, m={dataset.m}, label kind {dataset.label_kind.value}")
        return dataset

    @staticmethod
    def _encode_column(values: np.ndarray, kind: ColumnKind, bins: int):
        """Codes, bin count, cut points (real columns) and levels (discrete columns)."""
        if kind != ColumnKind.REAL:
            levels, codes = np.unique(values, return_inverse=True)
            return codes.reshape(-1), int(levels.size), None, [float(v) for v in levels]

        if np.unique(values).size <= 1:
            return np.zeros(values.size, dtype=np.int64), 1, [], None

        binned, edges = pd.qcut(values, q=bins, labels=False, retbins=True, duplicates="drop")
        binned = np.asarray(binned, dtype=np.int64)
        # bins left empty by merged quantiles are squeezed out
        used, codes = np.unique(binned, return_inverse=True)
        cuts = [float(edges[b]) for b in used[1:]]
        return codes.reshape(-1), int(used.size), cuts, None

    def discretize(
        self,
        d: Dataset,
        bins: Optional[int] = None,
        label_bins: Optional[int] = None,
    ) -> DiscretizedDataset:
        bins = bins or config.BINS
        label_bins = label_bins or config.LABEL_BINS
        if d.n == 0:
            raise EmptyDataset(f"Cannot discretize {d.name}: it has no rows")
        if bins < 2 and ColumnKind.REAL in d.column_kinds:
            raise DataError("bins must be at least 2 when real columns are present")
        if label_bins < 2 and d.label_kind == ColumnKind.REAL:
            raise DataError("label_bins must be at least 2 for a real label")

        codes = np.zeros((d.n, d.m), dtype=np.int64)
        bin_counts: List[int] = []
        bin_edges: List[Optional[List[float]]] = []
        levels: List[Optional[List[float]]] = []
        for j, kind in enumerate(d.column_kinds):
            column_codes, count, cuts, column_levels = self._encode_column(d.features[:, j], kind, bins)
            codes[:, j] = column_codes
            bin_counts.append(count)
            bin_edges.append(cuts)
            levels.append(column_levels)

        label_codes, label_classes, label_edges, label_levels = self._encode_column(d.label, d.label_kind, label_bins)

        logger.info(
            f"Discretized {d.name}: {sum(k == ColumnKind.REAL for k in d.column_kinds)} real columns "
            f"into <= {bins} bins, {label_classes} label classes"
        )
        return DiscretizedDataset(
            name=d.name,
            feature_names=list(d.feature_names),
            codes=codes,
            label_codes=label_codes,
            bin_counts=bin_counts,
            label_classes=label_classes,
            bin_edges=bin_edges,
            levels=levels,
            label_edges=label_edges,
            label_levels=label_levels,
        )

    def class_labels(self, d: Dataset, ddata: DiscretizedDataset) -> np.ndarray:
        """Class codes of d's labels under the label encoding of ddata.

        Discrete labels never seen when ddata was built map to -1.
        """
        if ddata.label_edges is not None:
            cuts = np.asarray(ddata.label_edges, dtype=np.float64)
            return np.searchsorted(cuts, d.label, side="left").astype(np.int64)
        levels = np.asarray(ddata.label_levels, dtype=np.float64)
        index = np.searchsorted(levels, d.label)
        clipped = np.minimum(index, levels.size - 1)
        known = (index < levels.size) & (levels[clipped] == d.label)
        return np.where(known, index, -1).astype(np.int64)

    def relabel(self, d: Dataset, ddata: DiscretizedDataset) -> Dataset:
        return d.with_label(self.class_labels(d, ddata), ColumnKind.INTEGER)

    @staticmethod
    def _allocate(counts: np.ndarray, total: int) -> np.ndarray:
        """Largest-remainder apportionment of `total` rows over the classes."""
        exact = counts * (total / counts.sum())
        quotas = np.floor(exact).astype(np.int64)
        remainder = int(total - quotas.sum())
        if remainder > 0:
            fractions = exact - quotas
            order = np.lexsort((np.arange(counts.size), -fractions))
            quotas[order[:remainder]] += 1
        return np.minimum(quotas, counts)

    def split(self, d: Dataset, spec: Optional[SplitSpec] = None) -> Tuple[Dataset, Dataset]:
        spec = spec or SplitSpec()
        fraction = spec.train_fraction
        if not (math.isfinite(fraction) and 0.0 < fraction <= 1.0):
            raise InvalidFraction(f"train_fraction must lie in (0, 1], got {fraction}")
        if d.n < 2:
            raise DataError(f"Cannot split {d.name}: it needs at least 2 rows, has {d.n}")

        n_train = int(math.floor(fraction * d.n + 0.5))
        rng = np.random.default_rng(spec.seed)

        if spec.stratified and d.label_kind != ColumnKind.REAL:
            _, inverse = np.unique(d.label, return_inverse=True)
            inverse = inverse.reshape(-1)
            quotas = self._allocate(np.bincount(inverse), n_train)
            chosen = [
                rng.permutation(np.flatnonzero(inverse == c))[:quota]
                for c, quota in enumerate(quotas)
            ]
            train_rows = np.sort(np.concatenate(chosen))
        else:
            train_rows = np.sort(rng.permutation(d.n)[:n_train])

        test_rows = np.setdiff1d(np.arange(d.n), train_rows)
        logger.info(f"Split {d.name}: {train_rows.size} train rows, {test_rows.size} test rows")
        return d.take(train_rows), d.take(test_rows)


data_service = DataService()

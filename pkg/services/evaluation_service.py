"""Evaluation protocol: classifiers, MCE / delta-I_r metrics, benchmark and cardinality sweeps."""
import logging
import time
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.linalg import LinAlgError, cho_factor, cho_solve
from scipy.spatial.distance import cdist
from sklearn.preprocessing import StandardScaler

from models import (BenchmarkReport, CEConfig, ClassifierKind, ClassifierSpec, Dataset,
                    DiscretizedDataset, Mask, MetricRecord, SelectionResult, SplitSpec, SweepPoint)
from models.errors import (EmptyTestSet, InsufficientClasses, InvalidK, LengthMismatch,
                           SingularCovariance)
from models.selection import as_mask
from services.baseline_service import BASELINE_METHODS, baseline_service
from services.data_service import data_service
from services.optimizer_service import optimizer_service
from utils.config import config
from utils.info_theory import JointStateColumn, entropy, relative_information_gap

logger = logging.getLogger(__name__)

METHODS = ("ce",) + BASELINE_METHODS
CLASSIFIER_ORDER = (ClassifierKind.GAUSSIAN_POOLED, ClassifierKind.GAUSSIAN_DIAGONAL, ClassifierKind.KNN)


def default_classifiers() -> List[ClassifierSpec]:
    return [ClassifierSpec(kind=kind) for kind in CLASSIFIER_ORDER]


class EvaluationService:

    # ------------------------------------------------------------------
    # Classifiers
    # ------------------------------------------------------------------

    def fit_predict(self, spec: ClassifierSpec, train: Dataset, test: Dataset, mask: Mask) -> np.ndarray:
        """Fit on the selected columns of `train` and predict the labels of `test`."""
        mask = as_mask(mask)
        selected = np.flatnonzero(mask)
        if selected.size == 0:
            raise InvalidK("the mask selects no feature")
        x_train = train.features[:, selected]
        x_test = test.features[:, selected]
        y_train = train.label
        classes, class_index = np.unique(y_train, return_inverse=True)
        class_index = class_index.reshape(-1)
        if classes.size < 2:
            raise InsufficientClasses(f"training data holds {classes.size} class(es); at least 2 are needed")
        if test.n == 0:
            return np.zeros(0, dtype=np.float64)

        if spec.kind == ClassifierKind.GAUSSIAN_POOLED:
            scores = self._gaussian_pooled(x_train, class_index, classes.size, x_test)
        elif spec.kind == ClassifierKind.GAUSSIAN_DIAGONAL:
            scores = self._gaussian_diagonal(x_train, class_index, classes.size, x_test)
        else:
            scores = self._knn_votes(x_train, class_index, classes.size, x_test, spec.k_neighbors)
        # argmax keeps the first maximum, i.e. the smaller class
        return classes[np.argmax(scores, axis=1)]

    @staticmethod
    def _log_priors(class_index: np.ndarray, n_classes: int) -> np.ndarray:
        counts = np.bincount(class_index, minlength=n_classes)
        return np.log(counts / counts.sum())

    def _gaussian_pooled(self, x, class_index, n_classes, x_test) -> np.ndarray:
        n, dim = x.shape
        means = np.vstack([x[class_index == c].mean(axis=0) for c in range(n_classes)])
        deviations = x - means[class_index]
        dof = n - n_classes
        if dof <= 0:
            raise SingularCovariance("not enough rows for a pooled covariance estimate")
        covariance = deviations.T @ deviations / dof
        if np.linalg.matrix_rank(covariance) < dim:
            raise SingularCovariance("pooled covariance of the selected features is rank deficient")
        try:
            factor = cho_factor(covariance)
        except LinAlgError as e:
            raise SingularCovariance(f"pooled covariance is not positive definite: {e}") from e

        priors = self._log_priors(class_index, n_classes)
        scores = np.empty((x_test.shape[0], n_classes))
        for c in range(n_classes):
            diff = x_test - means[c]
            mahalanobis = np.sum(diff * cho_solve(factor, diff.T).T, axis=1)
            scores[:, c] = priors[c] - 0.5 * mahalanobis
        return scores

    def _gaussian_diagonal(self, x, class_index, n_classes, x_test) -> np.ndarray:
        priors = self._log_priors(class_index, n_classes)
        scores = np.empty((x_test.shape[0], n_classes))
        for c in range(n_classes):
            rows = x[class_index == c]
            mean = rows.mean(axis=0)
            variance = np.maximum(rows.var(axis=0), config.VARIANCE_FLOOR)
            log_density = -0.5 * np.sum(np.log(2.0 * np.pi * variance)) \
                - 0.5 * np.sum((x_test - mean) ** 2 / variance, axis=1)
            scores[:, c] = priors[c] + log_density
        return scores

    def _knn_votes(self, x, class_index, n_classes, x_test, k_neighbors) -> np.ndarray:
        scaler = StandardScaler().fit(x)
        distances = cdist(scaler.transform(x_test), scaler.transform(x), metric="euclidean")
        k = min(k_neighbors, x.shape[0])
        # stable sort: equal distances keep the lower training row first
        nearest = np.argsort(distances, axis=1, kind="stable")[:, :k]
        votes = np.zeros((x_test.shape[0], n_classes))
        for row, neighbours in enumerate(nearest):
            votes[row] = np.bincount(class_index[neighbours], minlength=n_classes)
        return votes

    # ------------------------------------------------------------------
    # Metrics
    # ------------------------------------------------------------------

    def mce(self, predicted: Sequence, actual: Sequence) -> float:
        """Misclassified observations divided by the number of observations."""
        predicted = np.asarray(predicted)
        actual = np.asarray(actual)
        if predicted.shape[0] != actual.shape[0]:
            raise LengthMismatch(f"{predicted.shape[0]} predictions for {actual.shape[0]} labels")
        if actual.shape[0] == 0:
            raise EmptyTestSet("the test set is empty")
        return float(np.mean(predicted != actual))

    def delta_ir(self, mask: Mask, ddata: DiscretizedDataset, bias_correction: bool = False) -> float:
        """|I(U;y) - H(y)| / I(U;y) on ddata; +inf when I(U;y) = 0."""
        information = optimizer_service.score(mask, ddata, bias_correction)
        label = JointStateColumn(codes=ddata.label_codes, cardinality=ddata.label_classes)
        return relative_information_gap(information, entropy(label, bias_correction))

    def _evaluate(self, spec: ClassifierSpec, train: Dataset, test: Dataset, mask: np.ndarray) -> Tuple[Optional[float], Optional[str]]:
        try:
            predicted = self.fit_predict(spec, train, test, mask)
        except (SingularCovariance, InsufficientClasses, InvalidK) as e:
            logger.info(f"{spec.label} not evaluable: {e}")
            return None, f"not evaluable: {e}"
        return self.mce(predicted, test.label), None

    # ------------------------------------------------------------------
    # Protocols
    # ------------------------------------------------------------------

    @staticmethod
    def canonical_methods(methods: Iterable[str]) -> List[str]:
        requested = {method.strip().lower() for method in methods if method.strip()}
        unknown = requested - set(METHODS)
        if unknown:
            raise ValueError(f"Unknown method(s) {', '.join(sorted(unknown))}; valid names: {', '.join(METHODS)}")
        return [method for method in METHODS if method in requested]

    @staticmethod
    def canonical_classifiers(specs: Iterable[ClassifierSpec]) -> List[ClassifierSpec]:
        return sorted(specs, key=lambda spec: (CLASSIFIER_ORDER.index(spec.kind), spec.k_neighbors))

    def benchmark(
        self,
        d: Dataset,
        methods: Iterable[str],
        cfg: Optional[CEConfig] = None,
        specs: Optional[Sequence[ClassifierSpec]] = None,
        split_spec: Optional[SplitSpec] = None,
        bins: Optional[int] = None,
        label_bins: Optional[int] = None,
        k: Optional[int] = None,
    ) -> BenchmarkReport:
        """Select with every method on the training split and score each selection.

        The CE runs first and its cardinality is the k given to the baselines,
        unless k is passed explicitly.
        """
        cfg = cfg or CEConfig()
        methods = self.canonical_methods(methods)
        specs = self.canonical_classifiers(specs or default_classifiers())
        report = BenchmarkReport(dataset=d.name, seed=cfg.seed)
        if not methods:
            return report
        if k is not None and not 1 <= k <= d.m:
            raise InvalidK(f"k must lie in [1, {d.m}], got {k}")

        train, test = data_service.split(d, split_spec or SplitSpec(seed=cfg.seed))
        ddata = data_service.discretize(train, bins, label_bins)
        train = data_service.relabel(train, ddata)
        test = data_service.relabel(test, ddata)

        selections: List[Tuple[str, List[int], float]] = []
        if "ce" in methods or k is None:
            ce_result = optimizer_service.run(ddata, cfg)
            if k is None:
                k = ce_result.cardinality
            if "ce" in methods:
                report.ce = ce_result
                selections.append(("ce", ce_result.selected_indices, ce_result.elapsed))
        report.cardinality = k

        baselines = [method for method in methods if method != "ce"]
        unmatched: List[str] = []
        if k == 0 and baselines:
            logger.warning("The CE selected no feature, so the baselines have no cardinality to match")
            unmatched, baselines = baselines, []

        for method in baselines:
            started = time.perf_counter()
            ranked = baseline_service.select(method, ddata, k)
            elapsed = time.perf_counter() - started
            logger.info(f"{method} selected {k} features in {elapsed:.3f}s")
            report.selections.append(ranked)
            selections.append((method, ranked.order, elapsed))

        for method, indices, elapsed in selections:
            mask = np.zeros(ddata.m, dtype=np.uint8)
            mask[np.asarray(indices, dtype=np.int64)] = 1
            gap = self.delta_ir(mask, ddata, cfg.bias_correction)
            for spec in specs:
                mce, note = self._evaluate(spec, train, test, mask)
                report.records.append(MetricRecord(
                    method=method,
                    classifier=spec,
                    mce=mce,
                    evaluable=mce is not None,
                    note=note,
                    delta_ir=gap,
                    delta_t=elapsed,
                    cardinality=len(indices),
                ))
        for method in unmatched:
            for spec in specs:
                report.records.append(MetricRecord(
                    method=method,
                    classifier=spec,
                    mce=None,
                    evaluable=False,
                    note="not evaluable: the CE selected no feature, so there is no cardinality to match",
                    delta_ir=float("inf"),
                    delta_t=0.0,
                    cardinality=0,
                ))
        return report

    def sweep_cardinality(
        self,
        method: str,
        ddata: DiscretizedDataset,
        train: Dataset,
        test: Dataset,
        k_values: Sequence[int],
        spec: ClassifierSpec,
        cfg: Optional[CEConfig] = None,
        ce_result: Optional[SelectionResult] = None,
    ) -> List[SweepPoint]:
        """(k, MCE, delta-I_r) for each k; train/test labels must share ddata's classes."""
        method = self.canonical_methods([method])[0]
        k_values = [int(k) for k in k_values]
        if not k_values:
            raise InvalidK("no k values given")
        for k in k_values:
            if not 1 <= k <= ddata.m:
                raise InvalidK(f"k must lie in [1, {ddata.m}], got {k}")

        if method == "ce":
            result = ce_result or optimizer_service.run(ddata, cfg or CEConfig())
            masks = [optimizer_service.top_k_mask(result.final_p, k) for k in k_values]
        else:
            ranked = baseline_service.select(method, ddata, max(k_values))
            masks = []
            for k in k_values:
                mask = np.zeros(ddata.m, dtype=np.uint8)
                mask[ranked.prefix(k)] = 1
                masks.append(mask)

        label = JointStateColumn(codes=ddata.label_codes, cardinality=ddata.label_classes)
        label_entropy = entropy(label)
        points = []
        for k, mask in zip(k_values, masks):
            information = optimizer_service.score(mask, ddata)
            mce, _ = self._evaluate(spec, train, test, mask)
            points.append(SweepPoint(
                k=k,
                mce=mce,
                delta_ir=relative_information_gap(information, label_entropy),
                mutual_information=information,
            ))
        return points

    @staticmethod
    def sweep_frame(points: Sequence[SweepPoint]) -> pd.DataFrame:
        """Plottable table with columns k, mce, delta_ir."""
        return pd.DataFrame(
            {
                "k": [point.k for point in points],
                "mce": [point.mce for point in points],
                "delta_ir": [point.delta_ir for point in points],
            },
            columns=["k", "mce", "delta_ir"],
        )


evaluation_service = EvaluationService()

"""Greedy information-theoretic selectors used as comparison methods.

Every selector starts from the feature with the largest I(x_j; y) and then
adds, one at a time, the candidate maximizing its own criterion. Ties go to
the lower column index.
"""
import logging
from typing import Callable, List

import numpy as np

from models import DiscretizedDataset, RankedSelection
from models.errors import InvalidK
from utils.info_theory import (JointStateColumn, conditional_mi, joint_encode, joint_entropy,
                               mutual_information)

logger = logging.getLogger(__name__)

BASELINE_METHODS = ("mim", "cmim", "mrmr", "disr")


class BaselineService:

    @staticmethod
    def _columns(ddata: DiscretizedDataset):
        columns = [joint_encode(ddata.codes[:, j]) for j in range(ddata.m)]
        label = JointStateColumn(codes=ddata.label_codes, cardinality=ddata.label_classes)
        return columns, label

    @staticmethod
    def _check_k(ddata: DiscretizedDataset, k: int) -> None:
        if not 1 <= k <= ddata.m:
            raise InvalidK(f"k must lie in [1, {ddata.m}], got {k}")

    @staticmethod
    def _argmax(scores: np.ndarray, candidates: List[int]) -> int:
        # candidates are kept in ascending order, so argmax's first hit is the lowest index
        values = scores[candidates]
        return candidates[int(np.argmax(values))]

    def relevance(self, ddata: DiscretizedDataset) -> np.ndarray:
        """I(x_j; y) for every column."""
        columns, label = self._columns(ddata)
        return np.array([mutual_information(column, label) for column in columns], dtype=np.float64)

    def rank_mim(self, ddata: DiscretizedDataset, k: int) -> RankedSelection:
        self._check_k(ddata, k)
        relevance = self.relevance(ddata)
        order = np.lexsort((np.arange(ddata.m), -relevance))[:k]
        return RankedSelection(
            method="mim",
            order=[int(j) for j in order],
            criterion_values=[float(relevance[j]) for j in order],
        )

    def _greedy(
        self,
        method: str,
        ddata: DiscretizedDataset,
        k: int,
        step_scores: Callable[[List[int], List[int]], np.ndarray],
    ) -> RankedSelection:
        self._check_k(ddata, k)
        relevance = self.relevance(ddata)
        candidates = list(range(ddata.m))
        first = self._argmax(relevance, candidates)
        picked, values = [first], [float(relevance[first])]
        candidates.remove(first)
        while len(picked) < k:
            scores = step_scores(picked, candidates)
            best = self._argmax(scores, candidates)
            picked.append(best)
            values.append(float(scores[best]))
            candidates.remove(best)
        logger.debug(f"{method} order: {picked}")
        return RankedSelection(method=method, order=picked, criterion_values=values)

    def select_cmim(self, ddata: DiscretizedDataset, k: int) -> RankedSelection:
        """Next pick maximizes min over picked s of I(x_j; y | x_s)."""
        columns, label = self._columns(ddata)
        # running minimum over the picked features, updated with the newest pick only
        worst = np.full(ddata.m, np.inf)

        def step(picked, candidates):
            newest = columns[picked[-1]]
            for j in candidates:
                worst[j] = min(worst[j], conditional_mi(columns[j], label, newest))
            return worst

        return self._greedy("cmim", ddata, k, step)

    def select_mrmr(self, ddata: DiscretizedDataset, k: int) -> RankedSelection:
        """Next pick maximizes I(x_j; y) - mean over picked s of I(x_j; x_s) (difference form)."""
        columns, _ = self._columns(ddata)
        relevance = self.relevance(ddata)
        redundancy = np.zeros(ddata.m)

        def step(picked, candidates):
            newest = columns[picked[-1]]
            for j in candidates:
                redundancy[j] += mutual_information(columns[j], newest)
            return relevance - redundancy / len(picked)

        return self._greedy("mrmr", ddata, k, step)

    def select_disr(self, ddata: DiscretizedDataset, k: int) -> RankedSelection:
        """Next pick maximizes sum over picked s of I(x_j x_s; y) / H(x_j x_s y)."""
        columns, label = self._columns(ddata)
        total = np.zeros(ddata.m)

        def step(picked, candidates):
            newest = columns[picked[-1]]
            for j in candidates:
                pair = joint_encode([columns[j], newest])
                denominator = joint_entropy(pair, label)
                if denominator > 0.0:
                    total[j] += mutual_information(pair, label) / denominator
            return total

        return self._greedy("disr", ddata, k, step)

    def symmetrical_relevance(self, ddata: DiscretizedDataset) -> np.ndarray:
        """I(x_j; y) / H(x_j, y), zero when the joint entropy vanishes."""
        columns, label = self._columns(ddata)
        values = np.zeros(ddata.m)
        for j, column in enumerate(columns):
            denominator = joint_entropy(column, label)
            if denominator > 0.0:
                values[j] = mutual_information(column, label) / denominator
        return values

    def select(self, method: str, ddata: DiscretizedDataset, k: int) -> RankedSelection:
        selectors = {
            "mim": self.rank_mim,
            "cmim": self.select_cmim,
            "mrmr": self.select_mrmr,
            "disr": self.select_disr,
        }
        if method not in selectors:
            raise ValueError(f"Unknown baseline {method!r}; valid names: {', '.join(BASELINE_METHODS)}")
        return selectors[method](ddata, k)


baseline_service = BaselineService()

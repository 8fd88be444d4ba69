"""Cross-entropy search over Bernoulli feature masks.

Feature selection is cast as estimating, for each feature, the probability
that it belongs to the subset maximizing I(U; y). Every iteration samples
masks from independent Bernoulli coordinates, keeps the elite masks scoring at
or above the (1 - rho)-quantile gamma_t, and refits p to the elite (the
per-coordinate mean, which is the maximum-likelihood fit of the elite sample).
The loop stops once gamma_t has moved less than epsilon over d iterations.
"""
import logging
import math
import time
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from joblib import Parallel, delayed

from models import BernoulliModel, CEConfig, DiscretizedDataset, ExtractPolicy, Mask, SelectionResult
from models.errors import CefsError, EmptyElite
from models.selection import as_mask
from utils.info_theory import (JointStateColumn, entropy, joint_encode, mutual_information,
                               relative_information_gap)

logger = logging.getLogger(__name__)

LADDER_FACTORS = (1, 2, 4, 8, 16, 20)


class _Scorer:
    """Objective evaluation with a per-run cache keyed by mask bits."""

    def __init__(self, ddata: DiscretizedDataset, cfg: CEConfig, score_fn: Callable):
        self.ddata = ddata
        self.cfg = cfg
        self.score_fn = score_fn
        self.cache: Dict[bytes, float] = {}

    def scores(self, masks: np.ndarray) -> np.ndarray:
        keys = [np.packbits(mask).tobytes() for mask in masks]
        pending: Dict[bytes, np.ndarray] = {}
        for key, mask in zip(keys, masks):
            if key not in self.cache and key not in pending:
                pending[key] = mask
        todo = list(pending.values())
        if self.cfg.n_jobs > 1 and len(todo) > 1:
            values = Parallel(n_jobs=self.cfg.n_jobs, prefer="threads")(
                delayed(self.score_fn)(mask, self.ddata, self.cfg.bias_correction) for mask in todo
            )
        else:
            values = [self.score_fn(mask, self.ddata, self.cfg.bias_correction) for mask in todo]
        for key, value in zip(pending, values):
            self.cache[key] = value
        return np.array([self.cache[key] for key in keys], dtype=np.float64)

    def objectives(self, masks: np.ndarray) -> np.ndarray:
        values = self.scores(masks)
        if self.cfg.size_penalty > 0.0:
            values = values - self.cfg.size_penalty * masks.sum(axis=1)
        return values


class OptimizerService:

    def sample_masks(self, model: BernoulliModel, count: int, rng: np.random.Generator) -> np.ndarray:
        """Draw `count` masks, bit i set with probability p_i. Rows are masks."""
        if count < 1:
            raise ValueError("count must be at least 1")
        return (rng.random((count, model.m)) < model.p).astype(np.uint8)

    def score(self, mask: Mask, ddata: DiscretizedDataset, bias_correction: bool = False) -> float:
        """I(U(z); y) in bits; the empty subset scores 0."""
        mask = as_mask(mask)
        if mask.shape[0] != ddata.m:
            raise ValueError(f"mask has {mask.shape[0]} bits, dataset has {ddata.m} columns")
        selected = np.flatnonzero(mask)
        if selected.size == 0:
            return 0.0
        label = JointStateColumn(codes=ddata.label_codes, cardinality=ddata.label_classes)
        return mutual_information(joint_encode(ddata.codes[:, selected]), label, bias_correction)

    def elite_threshold(self, scores: Sequence[float], rho: float) -> Tuple[float, np.ndarray]:
        """gamma is the score at rank ceil(rho * S) of the descending order; ties join the elite."""
        scores = np.asarray(scores, dtype=np.float64)
        if scores.size < 1:
            raise ValueError("at least one score is required")
        if not 0.0 < rho < 1.0:
            raise ValueError(f"rho must lie in (0, 1), got {rho}")
        rank = max(1, math.ceil(rho * scores.size - 1e-9))
        ordered = np.sort(scores)[::-1]
        gamma = float(ordered[rank - 1])
        return gamma, np.flatnonzero(scores >= gamma)

    def update_probabilities(
        self,
        masks: np.ndarray,
        previous: BernoulliModel,
        alpha: float = 1.0,
    ) -> BernoulliModel:
        """p_i = mean of bit i over the elite, blended with the previous p by alpha."""
        masks = np.asarray(masks, dtype=np.uint8)
        if masks.ndim != 2 or masks.shape[0] == 0:
            raise EmptyElite("the elite set is empty")
        raw = masks.sum(axis=0, dtype=np.int64) / masks.shape[0]
        if alpha == 1.0:
            return BernoulliModel(p=raw)
        return BernoulliModel(p=np.clip(alpha * raw + (1.0 - alpha) * previous.p, 0.0, 1.0))

    @staticmethod
    def _rho(cfg: CEConfig, m: int, size: int) -> float:
        return min(max(cfg.rho_coefficient * m / size, 1.0 / size), 0.5)

    def sample_size_ladder(self, m: int, cfg: CEConfig) -> List[int]:
        s_min, s_max = cfg.resolve_sizes(m)
        ladder = [factor * m for factor in LADDER_FACTORS if s_min <= factor * m <= s_max]
        return ladder or [s_max]

    def adapt_sample_size(
        self,
        model: BernoulliModel,
        ddata: DiscretizedDataset,
        cfg: CEConfig,
        rng: np.random.Generator,
        scorer: Optional[_Scorer] = None,
    ) -> Tuple[int, np.ndarray, np.ndarray, float]:
        """Pick S_h from the ladder, reusing the draws of smaller candidates.

        Returns (S_h, masks, objectives, rho). The chosen size has the largest
        gamma; ties go to the larger size. With adaptive_s off a single draw of
        s_max masks is made.
        """
        scorer = scorer or _Scorer(ddata, cfg, self.score)
        m = ddata.m
        if not cfg.adaptive_s:
            _, s_max = cfg.resolve_sizes(m)
            masks = self.sample_masks(model, s_max, rng)
            return s_max, masks, scorer.objectives(masks), self._rho(cfg, m, s_max)

        masks = np.zeros((0, m), dtype=np.uint8)
        objectives = np.zeros(0, dtype=np.float64)
        best = None
        for size in self.sample_size_ladder(m, cfg):
            extra = self.sample_masks(model, size - masks.shape[0], rng)
            masks = np.vstack([masks, extra])
            objectives = np.concatenate([objectives, scorer.objectives(extra)])
            rho = self._rho(cfg, m, size)
            gamma, elite = self.elite_threshold(objectives, rho)
            if elite.size and (best is None or gamma >= best[1]):
                best = (size, gamma, rho)

        size, _, rho = best
        return size, masks[:size], objectives[:size], rho

    def extract_subset(
        self,
        model: BernoulliModel,
        policy: ExtractPolicy = ExtractPolicy.THRESHOLD,
        rng: Optional[np.random.Generator] = None,
    ) -> Mask:
        if ExtractPolicy(policy) == ExtractPolicy.SAMPLE:
            rng = rng if rng is not None else np.random.default_rng()
            return self.sample_masks(model, 1, rng)[0]
        return (model.p >= 0.5).astype(np.uint8)

    def top_k_mask(self, model: BernoulliModel, k: int) -> Mask:
        """The k coordinates with the largest p_i (ties by lower index)."""
        order = np.lexsort((np.arange(model.m), -model.p))
        mask = np.zeros(model.m, dtype=np.uint8)
        mask[order[:k]] = 1
        return mask

    def run(self, ddata: DiscretizedDataset, cfg: Optional[CEConfig] = None) -> SelectionResult:
        cfg = cfg or CEConfig()
        m = ddata.m
        if m < 1 or ddata.n < 1:
            raise CefsError(f"{ddata.name} has no features or no rows to select from")

        started = time.perf_counter()
        rng = np.random.default_rng(cfg.seed)
        scorer = _Scorer(ddata, cfg, self.score)
        model = BernoulliModel.uniform(m, cfg.p_init)
        gammas: List[float] = []
        sizes: List[int] = []
        converged = False

        for t in range(1, cfg.max_iters + 1):
            if cfg.adaptive_s:
                size, masks, objectives, rho = self.adapt_sample_size(model, ddata, cfg, rng, scorer)
            else:
                _, size = cfg.resolve_sizes(m)
                masks = self.sample_masks(model, size, rng)
                objectives = scorer.objectives(masks)
                rho = self._rho(cfg, m, size)
            gamma, elite = self.elite_threshold(objectives, rho)
            model = self.update_probabilities(masks[elite], model, cfg.smoothing_alpha)
            gammas.append(gamma)
            sizes.append(size)
            logger.debug(f"t={t} S={size} rho={rho:.4f} gamma={gamma:.6f} elite={elite.size}")

            # gamma_t for t <= 0 is +inf, so the earliest exit is t = d + 1
            if t > cfg.d and abs(gamma - gammas[t - 1 - cfg.d]) < cfg.epsilon:
                converged = True
                break

        mask = self.extract_subset(model, cfg.extract_policy, rng)
        selected = np.flatnonzero(mask)
        objective = self.score(mask, ddata, cfg.bias_correction)
        label = JointStateColumn(codes=ddata.label_codes, cardinality=ddata.label_classes)
        entropy_y = entropy(label, cfg.bias_correction)
        elapsed = time.perf_counter() - started

        if converged:
            logger.info(f"CE converged after {len(gammas)} iterations: {selected.size} features, I={objective:.4f} bits")
        else:
            logger.warning(f"CE stopped at max_iters={cfg.max_iters} without converging")

        return SelectionResult(
            final_p=model,
            mask=[int(b) for b in mask],
            selected_indices=[int(j) for j in selected],
            selected_names=[ddata.feature_names[j] for j in selected],
            gamma_trace=gammas,
            sample_size_trace=sizes,
            iterations=len(gammas),
            objective=objective,
            entropy_y=entropy_y,
            delta_ir=relative_information_gap(objective, entropy_y),
            elapsed=elapsed,
            converged=converged,
        )


optimizer_service = OptimizerService()

"""End-to-end checks of automatic cardinality, convergence speed and a real dataset."""
import numpy as np
import pytest

from models import CEConfig, ClassifierKind, ClassifierSpec, SplitSpec, catalog_entry
from scripts.reproduce_benchmarks import REPRODUCTION_ALPHA, REPRODUCTION_SIZE_PENALTY
from services.data_service import data_service
from services.evaluation_service import evaluation_service
from services.optimizer_service import optimizer_service
from utils.config import config

from tests.conftest import function_of_subset, make_ddata

WDBC = config.DATA_DIR / "wdbc.csv"


@pytest.fixture(scope="module")
def three_feature_runs():
    runs = []
    for seed in range(10):
        codes, label, relevant = function_of_subset(seed=seed, n=2000, m=20, relevant=3, levels=3)
        cfg = CEConfig(seed=seed, size_penalty=REPRODUCTION_SIZE_PENALTY, smoothing_alpha=REPRODUCTION_ALPHA)
        runs.append((relevant, optimizer_service.run(make_ddata(codes, label), cfg)))
    return runs


@pytest.mark.slow
def test_recovers_exactly_the_informative_features(three_feature_runs):
    hits = sum(
        result.selected_indices == relevant and result.delta_ir <= 0.05
        for relevant, result in three_feature_runs
    )
    assert hits >= 8
    assert all(result.elapsed <= 60.0 for _, result in three_feature_runs)


@pytest.mark.slow
def test_converges_in_few_iterations(three_feature_runs):
    iterations = [result.iterations for _, result in three_feature_runs]
    assert np.mean(iterations) <= 30
    assert all(result.converged for _, result in three_feature_runs)


@pytest.mark.slow
@pytest.mark.skipif(not WDBC.exists(), reason="run scripts/download_datasets.py to fetch wdbc.csv")
def test_wdbc_protocol():
    entry = catalog_entry("wdbc")
    d = data_service.load_csv(WDBC, entry.label_column, drop_columns=entry.drop_columns)
    spec = ClassifierSpec(kind=ClassifierKind.GAUSSIAN_DIAGONAL)
    errors, sizes = [], []
    for seed in range(10):
        report = evaluation_service.benchmark(d, ["ce"], CEConfig(seed=seed), [spec], SplitSpec(seed=seed))
        errors.append(report.records[0].mce)
        sizes.append(report.cardinality)
    assert np.mean(errors) <= 0.08
    assert 12 <= np.mean(sizes) <= 28

import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from models import CEConfig, ClassifierKind, ClassifierSpec, SplitSpec
from models.errors import EmptyTestSet, InsufficientClasses, InvalidK, LengthMismatch, SingularCovariance
from services.data_service import data_service
from services.evaluation_service import default_classifiers, evaluation_service
from utils.info_theory import conditional_entropy, joint_encode

from tests.conftest import function_of_subset, make_dataset, make_ddata

POOLED = ClassifierSpec(kind=ClassifierKind.GAUSSIAN_POOLED)
DIAGONAL = ClassifierSpec(kind=ClassifierKind.GAUSSIAN_DIAGONAL)


def separated(seed: int, n: int):
    rng = np.random.default_rng(seed)
    label = np.arange(n) % 2
    features = np.column_stack([20.0 * label + rng.normal(0.0, 1.0, n), rng.normal(0.0, 1.0, n)])
    return make_dataset(features, label)


def constant_within_classes(n: int = 40):
    rng = np.random.default_rng(0)
    label = np.arange(n) % 2
    features = np.column_stack([label + rng.normal(0.0, 0.5, n), np.full(n, 3.0)])
    return make_dataset(features, label)


class TestClassifiers:

    @pytest.mark.parametrize("spec", default_classifiers(), ids=lambda spec: spec.label)
    def test_separable_classes(self, spec):
        train, test = separated(1, 200), separated(2, 50)
        predicted = evaluation_service.fit_predict(spec, train, test, [1, 0])
        assert evaluation_service.mce(predicted, test.label) == 0.0

    def test_knn_exact_match(self):
        train = make_dataset([[0.0, 0.0], [5.0, 5.0], [9.0, 1.0]], [0, 1, 2])
        test = make_dataset([[5.0, 5.0]], [1])
        spec = ClassifierSpec(kind=ClassifierKind.KNN, k_neighbors=1)
        assert evaluation_service.fit_predict(spec, train, test, [1, 1]).tolist() == [1.0]

    def test_knn_vote_tie_goes_to_smaller_class(self):
        train = make_dataset([[0.0], [2.0]], [1, 0])
        test = make_dataset([[1.0]], [0])
        spec = ClassifierSpec(kind=ClassifierKind.KNN, k_neighbors=2)
        assert evaluation_service.fit_predict(spec, train, test, [1]).tolist() == [0.0]

    def test_pooled_covariance_singular(self):
        d = constant_within_classes()
        with pytest.raises(SingularCovariance):
            evaluation_service.fit_predict(POOLED, d, d, [1, 1])

    def test_diagonal_never_singular(self):
        d = constant_within_classes()
        predicted = evaluation_service.fit_predict(DIAGONAL, d, d, [1, 1])
        assert 0.0 <= evaluation_service.mce(predicted, d.label) <= 1.0

    def test_empty_mask(self):
        d = separated(0, 10)
        with pytest.raises(InvalidK):
            evaluation_service.fit_predict(DIAGONAL, d, d, [0, 0])

    def test_single_class(self):
        d = make_dataset([[0.0], [1.0], [2.0]], [1, 1, 1])
        with pytest.raises(InsufficientClasses):
            evaluation_service.fit_predict(DIAGONAL, d, d, [1])


class TestMetrics:

    def test_mce(self):
        assert evaluation_service.mce([0, 1, 1, 0], [0, 1, 1, 0]) == 0.0
        assert evaluation_service.mce([0, 1, 1, 0], [1, 1, 0, 0]) == 0.5

    def test_mce_errors(self):
        with pytest.raises(EmptyTestSet):
            evaluation_service.mce([], [])
        with pytest.raises(LengthMismatch):
            evaluation_service.mce([0], [0, 1])

    def test_delta_ir_at_the_limit(self):
        label = np.array([0, 1, 2, 1, 0, 2])
        ddata = make_ddata(np.column_stack([label, label % 2]), label)
        assert evaluation_service.delta_ir([1, 0], ddata) == 0.0

    def test_delta_ir_without_information(self):
        ddata = make_ddata([[0, 0], [0, 1], [1, 0], [1, 1]], [0, 1, 0, 1])
        assert evaluation_service.delta_ir([1, 0], ddata) == math.inf

    @given(st.data())
    def test_delta_ir_vanishes_exactly_when_the_label_is_determined(self, data):
        n = data.draw(st.integers(2, 40))
        m = data.draw(st.integers(1, 4))
        codes = np.array(data.draw(st.lists(st.lists(st.integers(0, 2), min_size=m, max_size=m), min_size=n, max_size=n)))
        label = np.array(data.draw(st.lists(st.integers(0, 2), min_size=n, max_size=n)))
        assume(len(set(label.tolist())) > 1)
        mask = np.array(data.draw(st.lists(st.integers(0, 1), min_size=m, max_size=m)), dtype=np.uint8)
        assume(mask.any())
        ddata = make_ddata(codes, label)
        selected = ddata.codes[:, np.flatnonzero(mask)]
        determined = conditional_entropy(ddata.label_codes, joint_encode(selected)) == 0.0
        assert (evaluation_service.delta_ir(mask, ddata) == 0.0) == determined


class TestBenchmark:

    def test_empty_method_set(self):
        report = evaluation_service.benchmark(separated(0, 40), [])
        assert report.records == []
        assert report.ce is None

    def test_unknown_method(self):
        with pytest.raises(ValueError, match="valid names"):
            evaluation_service.benchmark(separated(0, 40), ["ce", "relief"])

    def test_ce_only_on_a_solvable_instance(self):
        codes, label, _ = function_of_subset(seed=1, n=400, m=6, relevant=2)
        d = make_dataset(codes, label)
        report = evaluation_service.benchmark(d, ["ce"], CEConfig(seed=2), [DIAGONAL])
        assert [record.method for record in report.records] == ["ce"]
        assert report.records[0].delta_ir <= 0.05

    def test_one_record_per_method_and_classifier(self):
        d = separated(3, 120)
        report = evaluation_service.benchmark(d, ["mrmr", "ce", "mim"], CEConfig(seed=1), split_spec=SplitSpec(seed=1))
        pairs = [(record.method, record.classifier.kind) for record in report.records]
        assert len(pairs) == 9 and len(set(pairs)) == 9
        assert [method for method, _ in pairs[::3]] == ["ce", "mim", "mrmr"]
        assert all(record.cardinality == report.cardinality for record in report.records)

    def test_singular_covariance_is_not_evaluable(self):
        d = constant_within_classes(60)
        report = evaluation_service.benchmark(d, ["mim"], CEConfig(seed=0), [POOLED, DIAGONAL], k=2)
        pooled, diagonal = report.records
        assert not pooled.evaluable and pooled.mce is None and "not evaluable" in pooled.note
        assert diagonal.evaluable and diagonal.mce is not None

    @pytest.mark.parametrize("k", [0, 3, 99])
    def test_explicit_k_outside_feature_count(self, k):
        with pytest.raises(InvalidK):
            evaluation_service.benchmark(separated(0, 40), ["mim", "cmim"], CEConfig(seed=0), k=k)

    def test_empty_ce_selection_keeps_baseline_records(self):
        d = separated(0, 40)
        report = evaluation_service.benchmark(d, ["ce", "mim"], CEConfig(seed=0, size_penalty=10.0), [DIAGONAL])
        assert report.ce.cardinality == 0
        assert report.cardinality == 0
        assert [record.method for record in report.records] == ["ce", "mim"]
        assert not any(record.evaluable for record in report.records)
        mim = report.records[1]
        assert mim.mce is None and mim.cardinality == 0
        assert "no cardinality to match" in mim.note
        assert math.isinf(mim.delta_ir)

    def test_deterministic_apart_from_timing(self):
        d = separated(5, 80)
        reports = [
            evaluation_service.benchmark(d, ["ce", "cmim", "disr"], CEConfig(seed=4)).to_json_dict()
            for _ in range(2)
        ]
        for report in reports:
            report["ce"]["elapsed_seconds"] = None
            for record in report["records"]:
                record["delta_t"] = None
        assert reports[0] == reports[1]


class TestSweep:

    def setup_method(self):
        codes, label, self.relevant = function_of_subset(seed=7, n=600, m=6, relevant=3, levels=3)
        d = make_dataset(codes, label)
        train, test = data_service.split(d, SplitSpec(seed=0))
        self.ddata = data_service.discretize(train)
        self.train = data_service.relabel(train, self.ddata)
        self.test = data_service.relabel(test, self.ddata)

    def test_baseline_curve(self):
        points = evaluation_service.sweep_cardinality("mim", self.ddata, self.train, self.test, [1, 2, 3, 6], DIAGONAL)
        assert [point.k for point in points] == [1, 2, 3, 6]
        information = [point.mutual_information for point in points]
        assert information == sorted(information)
        full = np.ones(self.ddata.m, dtype=np.uint8)
        assert points[-1].delta_ir == evaluation_service.delta_ir(full, self.ddata)

    def test_ce_curve_reaches_its_minimum_at_the_informative_count(self):
        cfg = CEConfig(seed=1, size_penalty=0.005, smoothing_alpha=0.7)
        points = evaluation_service.sweep_cardinality("ce", self.ddata, self.train, self.test, range(1, 7), DIAGONAL, cfg)
        gaps = [point.delta_ir for point in points]
        assert gaps[2] == min(gaps)
        assert gaps[2] <= 0.05

    def test_invalid_k(self):
        with pytest.raises(InvalidK):
            evaluation_service.sweep_cardinality("mim", self.ddata, self.train, self.test, [7], DIAGONAL)

    def test_frame(self):
        points = evaluation_service.sweep_cardinality("cmim", self.ddata, self.train, self.test, [2], DIAGONAL)
        frame = evaluation_service.sweep_frame(points)
        assert list(frame.columns) == ["k", "mce", "delta_ir"]
        assert len(frame) == 1

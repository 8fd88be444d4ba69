import orjson
import pytest
from typer.testing import CliRunner

from app import EXIT_ERROR, EXIT_NOT_CONVERGED, EXIT_OK, app, main, parse_ks

runner = CliRunner()


def invoke(*args):
    return runner.invoke(app, [str(arg) for arg in args])


def load(path):
    return orjson.loads(path.read_bytes())


def without_timing(payload):
    payload = dict(payload)
    payload.pop("elapsed_seconds", None)
    manifest = dict(payload.pop("manifest"))
    manifest.pop("started_at")
    manifest.pop("finished_at")
    payload["manifest"] = manifest
    if "records" in payload:
        payload["records"] = [dict(record, delta_t=None) for record in payload["records"]]
    if payload.get("ce"):
        payload["ce"] = dict(payload["ce"], elapsed_seconds=None)
    return payload


class TestSelect:

    def test_happy_path(self, separable_csv, tmp_path):
        out = tmp_path / "select.json"
        result = invoke("select", "--data", separable_csv, "--label", "y", "--seed", 7, "--out", out)
        assert result.exit_code == EXIT_OK, result.output
        payload = load(out)
        assert 0 in payload["selected_indices"]
        assert payload["selected_names"][0] == "a"
        assert payload["converged"] is True
        assert payload["manifest"]["seed"] == 7
        assert len(payload["manifest"]["dataset_sha256"]) == 64
        assert payload["manifest"]["config"]["run"]["bins"] == 10

    def test_writes_standard_output(self, separable_csv):
        result = invoke("select", "--data", separable_csv, "--label", "y")
        assert result.exit_code == EXIT_OK
        assert "selected_indices" in orjson.loads(result.stdout)

    def test_missing_label(self, separable_csv):
        result = invoke("select", "--data", separable_csv)
        assert result.exit_code == EXIT_ERROR
        assert "--label" in result.output

    def test_missing_file(self, tmp_path):
        result = invoke("select", "--data", tmp_path / "absent.csv", "--label", "y")
        assert result.exit_code == EXIT_ERROR

    def test_iteration_cap(self, separable_csv, tmp_path):
        out = tmp_path / "capped.json"
        result = invoke("select", "--data", separable_csv, "--label", "y", "--max-iters", 1, "--out", out)
        assert result.exit_code == EXIT_NOT_CONVERGED
        assert load(out)["converged"] is False

    def test_invalid_setting(self, separable_csv):
        result = invoke("select", "--data", separable_csv, "--label", "y", "--alpha", 1.5)
        assert result.exit_code == EXIT_ERROR


class TestBenchmark:

    def test_every_method_and_classifier(self, separable_csv, tmp_path):
        out = tmp_path / "report.json"
        result = invoke("benchmark", "--data", separable_csv, "--label", "y", "--out", out)
        assert result.exit_code == EXIT_OK, result.output
        payload = load(out)
        pairs = {(record["method"], record["classifier"]["kind"]) for record in payload["records"]}
        assert len(pairs) == len(payload["records"]) == 15
        assert payload["mrmr_variant"] == "difference"
        assert set(payload["ce"]) >= {"selected_indices", "gamma_trace", "objective_bits"}

    def test_single_method(self, separable_csv, tmp_path):
        out = tmp_path / "report.json"
        result = invoke("benchmark", "--data", separable_csv, "--label", "y", "--methods", "ce", "--out", out)
        assert result.exit_code == EXIT_OK
        assert {record["method"] for record in load(out)["records"]} == {"ce"}

    def test_unknown_method(self, separable_csv):
        result = invoke("benchmark", "--data", separable_csv, "--label", "y", "--methods", "ce,relief")
        assert result.exit_code == EXIT_ERROR
        assert "valid names: ce, mim, cmim, mrmr, disr" in result.output

    def test_unknown_classifier(self, separable_csv):
        result = invoke("benchmark", "--data", separable_csv, "--label", "y", "--classifiers", "svm")
        assert result.exit_code == EXIT_ERROR

    def test_cardinality_beyond_feature_count(self, separable_csv):
        result = invoke("benchmark", "--data", separable_csv, "--label", "y", "--methods", "mim", "--k", 99)
        assert result.exit_code == EXIT_ERROR
        assert "k must lie in [1, 4]" in result.output


class TestSweep:

    def test_range(self, separable_csv, tmp_path):
        out = tmp_path / "curve.csv"
        result = invoke("sweep", "--data", separable_csv, "--label", "y", "--method", "ce", "--ks", "1..4", "--out", out)
        assert result.exit_code == EXIT_OK, result.output
        lines = out.read_text().splitlines()
        assert lines[0].startswith("# manifest: ")
        assert lines[1] == "k,mce,delta_ir"
        assert [line.split(",")[0] for line in lines[2:]] == ["1", "2", "3", "4"]

    def test_single_k(self, separable_csv, tmp_path):
        out = tmp_path / "curve.csv"
        result = invoke("sweep", "--data", separable_csv, "--label", "y", "--method", "mim", "--ks", 2, "--out", out)
        assert result.exit_code == EXIT_OK
        assert len(out.read_text().splitlines()) == 3

    def test_k_beyond_feature_count(self, separable_csv):
        result = invoke("sweep", "--data", separable_csv, "--label", "y", "--ks", 5)
        assert result.exit_code == EXIT_ERROR
        assert "m = 4" in result.output


class TestReport:

    def test_csv_and_table(self, separable_csv, tmp_path):
        report = tmp_path / "report.json"
        invoke("benchmark", "--data", separable_csv, "--label", "y", "--methods", "ce,mim", "--out", report)
        csv_out = tmp_path / "table.csv"
        result = invoke("report", report, "--format", "csv", "--out", csv_out)
        assert result.exit_code == EXIT_OK
        lines = csv_out.read_text().splitlines()
        assert lines[0] == "metric,ce,mim"
        assert [line.split(",")[0] for line in lines[1:]] == [
            "MCE gaussian_pooled", "MCE gaussian_diagonal", "MCE knn(k=3)", "delta_I_r", "delta_t", "cardinality",
        ]
        table = invoke("report", report)
        assert table.exit_code == EXIT_OK
        assert "delta_I_r" in table.stdout

    def test_markdown(self, separable_csv, tmp_path):
        report = tmp_path / "report.json"
        invoke("benchmark", "--data", separable_csv, "--label", "y", "--methods", "mim", "--k", 2, "--out", report)
        result = invoke("report", report, "--format", "markdown")
        assert result.exit_code == EXIT_OK
        assert result.stdout.lstrip().startswith("|")

    def test_unknown_format(self, separable_csv, tmp_path):
        report = tmp_path / "report.json"
        invoke("benchmark", "--data", separable_csv, "--label", "y", "--methods", "mim", "--k", 2, "--out", report)
        assert invoke("report", report, "--format", "xml").exit_code == EXIT_ERROR


class TestDeterminism:

    @pytest.mark.parametrize("command", ["select", "benchmark"])
    def test_identical_runs(self, command, separable_csv, tmp_path):
        out = tmp_path / f"{command}.json"
        payloads = []
        for _ in range(2):
            result = invoke(command, "--data", separable_csv, "--label", "y", "--seed", 3, "--out", out)
            assert result.exit_code in (EXIT_OK, EXIT_NOT_CONVERGED)
            payloads.append(without_timing(load(out)))
        assert orjson.dumps(payloads[0], option=orjson.OPT_SORT_KEYS) == \
            orjson.dumps(payloads[1], option=orjson.OPT_SORT_KEYS)


class TestEntryPoint:

    def test_usage_error_maps_to_one(self):
        assert main(["no-such-command"]) == EXIT_ERROR

    def test_missing_option_maps_to_one(self, separable_csv):
        assert main(["select", "--data", str(separable_csv)]) == EXIT_ERROR

    def test_ks_syntax(self):
        assert parse_ks("1..3,7") == [1, 2, 3, 7]

import functools
import hashlib
import io
import sys
from datetime import datetime
from pathlib import Path
from typing import Dict, List, Optional

import click
import orjson
import pandas as pd
import typer
from pydantic import ValidationError
from rich import box
from rich.console import Console
from rich.markup import escape
from rich.table import Table
from typing_extensions import Annotated

from models import (CEConfig, ClassifierSpec, Dataset, ExtractPolicy,
                    MetricRecord, RunManifest, SplitSpec)
from models.errors import CefsError
from models.evaluation import CLASSIFIER_ALIASES
from services import data_service, evaluation_service, optimizer_service
from services.evaluation_service import METHODS
from utils.config import config
from utils.log_setup import setup_logging, stderr_console

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_NOT_CONVERGED = 2

app = typer.Typer(
    add_completion=False,
    no_args_is_help=True,
    help="Feature selection by cross-entropy search over Bernoulli feature masks.",
)

# ============================================================================
# Shared Options
# ============================================================================

DataOpt = Annotated[Optional[Path], typer.Option("--data", help="CSV file (relative paths also searched in CEFS_DATA_DIR)")]
LabelOpt = Annotated[Optional[str], typer.Option("--label", help="Label column name or 0-based index")]
NoHeaderOpt = Annotated[bool, typer.Option("--no-header", help="The CSV has no header row")]
DropOpt = Annotated[Optional[List[str]], typer.Option("--drop", help="Column to drop before loading (repeatable)")]
SeedOpt = Annotated[int, typer.Option("--seed", help="Seed for sampling and splitting")]
BinsOpt = Annotated[Optional[int], typer.Option("--bins", help="Equal-frequency bins for real columns")]
LabelBinsOpt = Annotated[Optional[int], typer.Option("--label-bins", help="Classes for a real label")]
MaxItersOpt = Annotated[Optional[int], typer.Option("--max-iters", help="Iteration cap of the CE loop")]
EpsilonOpt = Annotated[Optional[float], typer.Option("--epsilon", help="Stopping tolerance on gamma")]
LagOpt = Annotated[Optional[int], typer.Option("--lag", help="Lag d of the stopping rule")]
AlphaOpt = Annotated[Optional[float], typer.Option("--alpha", help="Smoothing of the probability update, in (0, 1]")]
PenaltyOpt = Annotated[Optional[float], typer.Option("--size-penalty", help="Bits subtracted per selected feature")]
ExtractOpt = Annotated[ExtractPolicy, typer.Option("--extract", help="How the final mask is read from p")]
StaticOpt = Annotated[bool, typer.Option("--static-s", help="Fixed sample size s_max instead of the adaptive ladder")]
SMinOpt = Annotated[Optional[int], typer.Option("--s-min", help="Smallest sample size (default m)")]
SMaxOpt = Annotated[Optional[int], typer.Option("--s-max", help="Largest sample size (default 20 * s_min)")]
JobsOpt = Annotated[Optional[int], typer.Option("--n-jobs", help="Threads used to score masks")]
OutOpt = Annotated[Optional[Path], typer.Option("--out", help="Write the result here instead of standard output")]
FractionOpt = Annotated[Optional[float], typer.Option("--train-fraction", help="Share of rows used for selection and fitting")]
NoStratifyOpt = Annotated[bool, typer.Option("--no-stratify", help="Split without preserving class proportions")]
NeighborsOpt = Annotated[Optional[int], typer.Option("--k-neighbors", help="Neighbours of the KNN classifier")]

# ============================================================================
# Helper Functions
# ============================================================================


def fail(message: str) -> typer.Exit:
    stderr_console.print(f"[bold red]error:[/bold red] {escape(message)}", soft_wrap=True)
    return typer.Exit(code=EXIT_ERROR)


def dumps(payload: Dict) -> str:
    return orjson.dumps(payload, option=orjson.OPT_INDENT_2 | orjson.OPT_SORT_KEYS).decode() + "\n"


def write_output(text: str, out: Optional[Path]) -> None:
    if out is None:
        typer.echo(text, nl=False)
    else:
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text, encoding="utf-8")
        stderr_console.print(f"Wrote {out}")


def file_checksum(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for block in iter(lambda: handle.read(1 << 20), b""):
            digest.update(block)
    return digest.hexdigest()


def load_dataset(data: Optional[Path], label: Optional[str], no_header: bool, drop: Optional[List[str]]) -> Dataset:
    if data is None:
        raise fail("missing option --data")
    if label is None:
        raise fail("missing option --label")
    return data_service.load_csv(data, label, header=not no_header, drop_columns=drop or ())


def build_ce_config(seed: int, **overrides) -> CEConfig:
    values = {key: value for key, value in overrides.items() if value is not None}
    return CEConfig(seed=seed, **values)


def build_manifest(ctx: typer.Context, seed: int, data: Optional[Path], run: Dict) -> RunManifest:
    command = [ctx.command_path] + [
        f"--{name.replace('_', '-')}={value}" for name, value in sorted(ctx.params.items())
    ]
    path = data_service.resolve_path(data) if data is not None else None
    return RunManifest(
        command=command,
        config={"environment": config.snapshot(), "run": run},
        seed=seed,
        dataset_path=str(path) if path is not None else None,
        dataset_sha256=file_checksum(path) if path is not None and path.exists() else None,
    )


def parse_classifiers(text: str, k_neighbors: Optional[int]) -> List[ClassifierSpec]:
    specs = []
    for name in [part.strip().lower() for part in text.split(",") if part.strip()]:
        if name not in CLASSIFIER_ALIASES:
            raise fail(f"unknown classifier {name!r}; valid names: {', '.join(CLASSIFIER_ALIASES)}")
        extra = {"k_neighbors": k_neighbors} if k_neighbors is not None else {}
        specs.append(ClassifierSpec(kind=CLASSIFIER_ALIASES[name], **extra))
    if not specs:
        raise fail("no classifier given")
    return specs


def parse_methods(text: str) -> List[str]:
    names = [part.strip().lower() for part in text.split(",") if part.strip()]
    unknown = [name for name in names if name not in METHODS]
    if unknown:
        raise fail(f"unknown method(s) {', '.join(unknown)}; valid names: {', '.join(METHODS)}")
    return names


def parse_ks(text: str) -> List[int]:
    """'1..10', '5' or '1,3,5..7'."""
    values: List[int] = []
    try:
        for part in [p.strip() for p in text.split(",") if p.strip()]:
            if ".." in part:
                low, high = part.split("..", 1)
                values.extend(range(int(low), int(high) + 1))
            else:
                values.append(int(part))
    except ValueError:
        raise fail(f"cannot read k values from {text!r}; use forms like 1..10 or 2,4,8")
    if not values:
        raise fail("no k values given")
    return values


def format_records(records: List[MetricRecord]) -> pd.DataFrame:
    """Methods as columns, metrics as rows, in the layout of a comparison table."""
    methods = list(dict.fromkeys(record.method for record in records))
    rows: Dict[str, Dict[str, str]] = {}
    for record in records:
        mce_row = f"MCE {record.classifier.label}"
        rows.setdefault(mce_row, {})[record.method] = "//" if record.mce is None else f"{record.mce:.4f}"
        rows.setdefault("delta_I_r", {})[record.method] = f"{record.delta_ir:.4f}"
        rows.setdefault("delta_t", {})[record.method] = f"{record.delta_t:.2f}"
        rows.setdefault("cardinality", {})[record.method] = str(record.cardinality)
    ordered = [name for name in rows if name.startswith("MCE")] + ["delta_I_r", "delta_t", "cardinality"]
    return pd.DataFrame([rows[name] for name in ordered if name in rows],
                        index=[name for name in ordered if name in rows], columns=methods)


def handle_errors(func):
    """Turn expected failures into exit code 1 with a message on standard error."""
    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except (CefsError, FileNotFoundError, ValidationError, ValueError) as e:
            raise fail(str(e))
    return wrapper

# ============================================================================
# Commands
# ============================================================================


@app.callback()
def main_options(
    log_level: Annotated[str, typer.Option("--log-level", help="DEBUG, INFO, WARNING or ERROR")] = config.LOG_LEVEL,
):
    setup_logging(log_level)
    try:
        config.validate()
    except ValueError as e:
        raise fail(str(e))


@app.command("select")
@handle_errors
def cmd_select(
    ctx: typer.Context,
    data: DataOpt = None,
    label: LabelOpt = None,
    no_header: NoHeaderOpt = False,
    drop: DropOpt = None,
    seed: SeedOpt = config.SEED,
    bins: BinsOpt = None,
    label_bins: LabelBinsOpt = None,
    max_iters: MaxItersOpt = None,
    epsilon: EpsilonOpt = None,
    lag: LagOpt = None,
    alpha: AlphaOpt = None,
    size_penalty: PenaltyOpt = None,
    extract: ExtractOpt = ExtractPolicy.THRESHOLD,
    static_s: StaticOpt = False,
    s_min: SMinOpt = None,
    s_max: SMaxOpt = None,
    n_jobs: JobsOpt = None,
    out: OutOpt = None,
):
    """Run the cross-entropy selection on a whole dataset and print the result JSON."""
    dataset = load_dataset(data, label, no_header, drop)
    cfg = build_ce_config(
        seed, max_iters=max_iters, epsilon=epsilon, d=lag, smoothing_alpha=alpha,
        size_penalty=size_penalty, extract_policy=extract, adaptive_s=not static_s,
        s_min=s_min, s_max=s_max, n_jobs=n_jobs,
    )
    ddata = data_service.discretize(dataset, bins, label_bins)
    result = optimizer_service.run(ddata, cfg)

    manifest = build_manifest(ctx, seed, data, {
        "bins": bins or config.BINS,
        "label_bins": label_bins or config.LABEL_BINS,
        "ce": cfg.model_dump(mode="json"),
    })
    manifest.finished_at = datetime.now()
    payload = result.to_json_dict()
    payload["selected_count"] = result.cardinality
    payload["manifest"] = manifest.model_dump(mode="json")
    write_output(dumps(payload), out)

    if not result.converged:
        stderr_console.print(f"[yellow]warning:[/yellow] not converged after {result.iterations} iterations")
        raise typer.Exit(code=EXIT_NOT_CONVERGED)


@app.command("benchmark")
@handle_errors
def cmd_benchmark(
    ctx: typer.Context,
    data: DataOpt = None,
    label: LabelOpt = None,
    no_header: NoHeaderOpt = False,
    drop: DropOpt = None,
    methods: Annotated[str, typer.Option("--methods", help="Comma-separated subset of ce,mim,cmim,mrmr,disr")] = ",".join(METHODS),
    classifiers: Annotated[str, typer.Option("--classifiers", help="Comma-separated subset of nb-pooled,nb-diag,knn")] = ",".join(CLASSIFIER_ALIASES),
    k: Annotated[Optional[int], typer.Option("--k", help="Cardinality for the baselines (default: the CE's)")] = None,
    seed: SeedOpt = config.SEED,
    bins: BinsOpt = None,
    label_bins: LabelBinsOpt = None,
    train_fraction: FractionOpt = None,
    no_stratify: NoStratifyOpt = False,
    k_neighbors: NeighborsOpt = None,
    max_iters: MaxItersOpt = None,
    epsilon: EpsilonOpt = None,
    lag: LagOpt = None,
    alpha: AlphaOpt = None,
    size_penalty: PenaltyOpt = None,
    extract: ExtractOpt = ExtractPolicy.THRESHOLD,
    static_s: StaticOpt = False,
    n_jobs: JobsOpt = None,
    out: OutOpt = None,
):
    """Compare CE with the baselines on a held-out split and print the report JSON."""
    method_names = parse_methods(methods)
    specs = parse_classifiers(classifiers, k_neighbors)
    dataset = load_dataset(data, label, no_header, drop)
    cfg = build_ce_config(
        seed, max_iters=max_iters, epsilon=epsilon, d=lag, smoothing_alpha=alpha,
        size_penalty=size_penalty, extract_policy=extract, adaptive_s=not static_s, n_jobs=n_jobs,
    )
    split_spec = SplitSpec(
        train_fraction=train_fraction if train_fraction is not None else config.TRAIN_FRACTION,
        seed=seed,
        stratified=not no_stratify,
    )
    report = evaluation_service.benchmark(
        dataset, method_names, cfg, specs, split_spec=split_spec, bins=bins, label_bins=label_bins, k=k,
    )
    report.manifest = build_manifest(ctx, seed, data, {
        "bins": bins or config.BINS,
        "label_bins": label_bins or config.LABEL_BINS,
        "split": split_spec.model_dump(mode="json"),
        "ce": cfg.model_dump(mode="json"),
    })
    report.manifest.finished_at = datetime.now()
    write_output(dumps(report.to_json_dict()), out)

    if report.ce is not None and not report.ce.converged:
        stderr_console.print("[yellow]warning:[/yellow] the CE selection did not converge")
        raise typer.Exit(code=EXIT_NOT_CONVERGED)


@app.command("sweep")
@handle_errors
def cmd_sweep(
    ctx: typer.Context,
    data: DataOpt = None,
    label: LabelOpt = None,
    no_header: NoHeaderOpt = False,
    drop: DropOpt = None,
    method: Annotated[str, typer.Option("--method", help="One of ce,mim,cmim,mrmr,disr")] = "ce",
    ks: Annotated[Optional[str], typer.Option("--ks", help="k values, e.g. 1..10 or 2,4,8")] = None,
    classifier: Annotated[str, typer.Option("--classifier", help="nb-pooled, nb-diag or knn")] = "nb-diag",
    seed: SeedOpt = config.SEED,
    bins: BinsOpt = None,
    label_bins: LabelBinsOpt = None,
    train_fraction: FractionOpt = None,
    no_stratify: NoStratifyOpt = False,
    k_neighbors: NeighborsOpt = None,
    max_iters: MaxItersOpt = None,
    alpha: AlphaOpt = None,
    size_penalty: PenaltyOpt = None,
    out: OutOpt = None,
):
    """MCE and delta-I_r against the number of retained features, as CSV."""
    method_name = parse_methods(method)
    if len(method_name) != 1:
        raise fail("--method takes exactly one method")
    spec = parse_classifiers(classifier, k_neighbors)[0]
    dataset = load_dataset(data, label, no_header, drop)
    k_values = parse_ks(ks) if ks is not None else list(range(1, dataset.m + 1))
    out_of_range = [k for k in k_values if not 1 <= k <= dataset.m]
    if out_of_range:
        raise fail(f"k values {out_of_range} fall outside [1, m] with m = {dataset.m}")

    split_spec = SplitSpec(
        train_fraction=train_fraction if train_fraction is not None else config.TRAIN_FRACTION,
        seed=seed,
        stratified=not no_stratify,
    )
    cfg = build_ce_config(seed, max_iters=max_iters, smoothing_alpha=alpha, size_penalty=size_penalty)
    train, test = data_service.split(dataset, split_spec)
    ddata = data_service.discretize(train, bins, label_bins)
    points = evaluation_service.sweep_cardinality(
        method_name[0], ddata, data_service.relabel(train, ddata), data_service.relabel(test, ddata),
        k_values, spec, cfg,
    )

    manifest = build_manifest(ctx, seed, data, {
        "bins": bins or config.BINS,
        "label_bins": label_bins or config.LABEL_BINS,
        "split": split_spec.model_dump(mode="json"),
        "ce": cfg.model_dump(mode="json"),
        "classifier": spec.model_dump(mode="json"),
    })
    manifest.finished_at = datetime.now()
    frame = evaluation_service.sweep_frame(points)
    comment = "# manifest: " + orjson.dumps(manifest.model_dump(mode="json"), option=orjson.OPT_SORT_KEYS).decode()
    body = frame.to_csv(index=False, lineterminator="\n", float_format="%.6g", na_rep="")
    write_output(comment + "\n" + body, out)


@app.command("report")
@handle_errors
def cmd_report(
    report_path: Annotated[Path, typer.Argument(help="BenchmarkReport JSON written by the benchmark command")],
    fmt: Annotated[str, typer.Option("--format", help="table, csv or markdown")] = "table",
    out: OutOpt = None,
):
    """Render a benchmark report as a comparison table."""
    if fmt not in ("table", "csv", "markdown"):
        raise fail(f"unknown format {fmt!r}; use table, csv or markdown")
    if not report_path.exists():
        raise fail(f"report not found: {report_path}")
    payload = orjson.loads(report_path.read_bytes())
    records = [MetricRecord.model_validate(record) for record in payload.get("records", [])]
    frame = format_records(records)

    if fmt == "csv":
        write_output(frame.to_csv(index_label="metric", lineterminator="\n"), out)
        return

    if fmt == "markdown":
        table = Table(box=box.MARKDOWN, show_edge=True)
    else:
        table = Table(title=f"{payload.get('dataset', '?')} (seed {payload.get('seed', '?')})")
    table.add_column("metric")
    for method in frame.columns:
        table.add_column(method, justify="right")
    for metric, row in frame.iterrows():
        table.add_row(str(metric), *[("" if pd.isna(value) else str(value)) for value in row])
    write_output(render_table(table), out)


def render_table(table: Table) -> str:
    buffer = io.StringIO()
    Console(file=buffer, width=120, color_system=None).print(table)
    return buffer.getvalue()

# ============================================================================
# Entry Point
# ============================================================================


def main(argv: Optional[List[str]] = None) -> int:
    """Run the application mapping usage errors to exit code 1."""
    try:
        result = app(args=argv, standalone_mode=False, prog_name="cefs")
    except click.exceptions.ClickException as e:
        e.show()
        return EXIT_ERROR
    except click.exceptions.Abort:
        return EXIT_ERROR
    return result if isinstance(result, int) else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

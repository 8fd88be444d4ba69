"""Run the full comparison over every prepared dataset and summarize it.

Writes one BenchmarkReport JSON per (dataset, seed) and a summary CSV with the
seed-averaged metrics to --out-dir.
"""
import logging
import sys
from pathlib import Path
from typing import List, Optional

import orjson
import pandas as pd
import typer
from tqdm import tqdm
from typing_extensions import Annotated

sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

from models import CATALOG, CEConfig, RunManifest, SplitSpec, catalog_entry  # noqa: E402
from models.errors import CefsError  # noqa: E402
from services import data_service, evaluation_service  # noqa: E402
from services.evaluation_service import METHODS, default_classifiers  # noqa: E402
from utils.config import config  # noqa: E402
from utils.log_setup import setup_logging, stderr_console  # noqa: E402

logger = logging.getLogger(__name__)

# Without a size penalty the plug-in objective saturates and most features end up selected.
REPRODUCTION_SIZE_PENALTY = 0.005
REPRODUCTION_ALPHA = 0.7

app = typer.Typer(add_completion=False)


def summarize(rows: List[dict]) -> pd.DataFrame:
    frame = pd.DataFrame(rows)
    if frame.empty:
        return frame
    grouped = frame.groupby(["dataset", "method", "classifier"], sort=False)
    return grouped.agg(
        mce=("mce", "mean"),
        not_evaluable=("mce", lambda values: int(values.isna().sum())),
        delta_ir=("delta_ir", "mean"),
        delta_t=("delta_t", "mean"),
        cardinality=("cardinality", "mean"),
        runs=("seed", "count"),
    ).reset_index()


@app.command()
def main(
    names: Annotated[Optional[List[str]], typer.Argument(help="Datasets to run (default: every prepared one)")] = None,
    seeds: Annotated[int, typer.Option("--seeds", help="Seeds 0..seeds-1")] = 10,
    out_dir: Annotated[Path, typer.Option("--out-dir")] = Path("reports"),
    size_penalty: Annotated[float, typer.Option("--size-penalty", help="Bits subtracted per selected feature")] = REPRODUCTION_SIZE_PENALTY,
    alpha: Annotated[float, typer.Option("--alpha", help="Smoothing of the probability update")] = REPRODUCTION_ALPHA,
    n_jobs: Annotated[int, typer.Option("--n-jobs")] = config.N_JOBS,
):
    setup_logging()
    entries = [catalog_entry(name) for name in names] if names else CATALOG
    entries = [entry for entry in entries if (config.DATA_DIR / entry.file_name).exists()]
    if not entries:
        stderr_console.print("No prepared datasets found; run scripts/download_datasets.py first")
        raise typer.Exit(code=1)

    out_dir.mkdir(parents=True, exist_ok=True)
    rows = []
    jobs = [(entry, seed) for entry in entries for seed in range(seeds)]
    datasets = {}
    for entry, seed in tqdm(jobs, desc="benchmark", unit="run"):
        if entry.name not in datasets:
            datasets[entry.name] = data_service.load_csv(
                config.DATA_DIR / entry.file_name, entry.label_column, drop_columns=entry.drop_columns,
            )
        cfg = CEConfig(seed=seed, size_penalty=size_penalty, smoothing_alpha=alpha, n_jobs=n_jobs)
        try:
            report = evaluation_service.benchmark(
                datasets[entry.name], METHODS, cfg, default_classifiers(), SplitSpec(seed=seed),
            )
        except CefsError as e:
            logger.warning(f"{entry.name} seed {seed} failed: {e}")
            continue
        report.manifest = RunManifest(
            command=sys.argv,
            config={"environment": config.snapshot(), "run": {"ce": cfg.model_dump(mode="json")}},
            seed=seed,
            dataset_path=str(config.DATA_DIR / entry.file_name),
        )
        payload = report.to_json_dict()
        (out_dir / f"{entry.name}_seed{seed}.json").write_bytes(
            orjson.dumps(payload, option=orjson.OPT_INDENT_2 | orjson.OPT_SORT_KEYS)
        )
        for record in report.records:
            rows.append({
                "dataset": entry.name,
                "seed": seed,
                "method": record.method,
                "classifier": record.classifier.label,
                "mce": record.mce,
                "delta_ir": record.delta_ir,
                "delta_t": record.delta_t,
                "cardinality": record.cardinality,
            })

    summary = summarize(rows)
    summary.to_csv(out_dir / "summary.csv", index=False)
    stderr_console.print(f"Summary of {len(rows)} records written to {out_dir / 'summary.csv'}")


if __name__ == "__main__":
    app()

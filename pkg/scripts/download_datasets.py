"""Download the benchmark datasets and write numeric CSVs into the data directory.

The command-line tool never touches the network; run this once beforehand:

    python scripts/download_datasets.py wdbc forest_fires
"""
import io
import logging
import sys
import zipfile
from pathlib import Path
from typing import Callable, Dict, List, Optional, Tuple

import pandas as pd
import requests
import typer
from typing_extensions import Annotated

sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

from models import CATALOG, CatalogEntry, catalog_entry  # noqa: E402
from utils.config import config  # noqa: E402
from utils.log_setup import setup_logging, stderr_console  # noqa: E402

logger = logging.getLogger(__name__)

TIMEOUT = 60
WDBC_MEASURES = ["radius", "texture", "perimeter", "area", "smoothness", "compactness",
                 "concavity", "concave_points", "symmetry", "fractal_dimension"]
MONTHS = {name: i + 1 for i, name in enumerate(
    ["jan", "feb", "mar", "apr", "may", "jun", "jul", "aug", "sep", "oct", "nov", "dec"])}
WEEKDAYS = {name: i + 1 for i, name in enumerate(["mon", "tue", "wed", "thu", "fri", "sat", "sun"])}
GESTURE_PHASES = {"D": 0, "P": 1, "S": 2, "H": 3, "R": 4}

app = typer.Typer(add_completion=False)


def fetch(url: str) -> Tuple[bool, bytes, str]:
    """Returns (success, content, error message)."""
    try:
        response = requests.get(url, timeout=TIMEOUT)
    except requests.RequestException as e:
        return False, b"", f"request failed: {e}"
    if response.status_code >= 400:
        return False, b"", f"HTTP {response.status_code} error"
    return True, response.content, ""


def raw_bytes(entry: CatalogEntry, raw_dir: Path) -> Optional[bytes]:
    """Local copy under raw/ if present, else a fresh download (cached to raw/)."""
    cached = raw_dir / Path(entry.source_url).name
    if cached.exists():
        return cached.read_bytes()
    logger.info(f"Downloading {entry.source_url}")
    success, content, error = fetch(entry.source_url)
    if not success:
        stderr_console.print(f"[red]{entry.name}[/red]: {error}")
        return None
    raw_dir.mkdir(parents=True, exist_ok=True)
    cached.write_bytes(content)
    return content


# ============================================================================
# Per-dataset preparation
# ============================================================================


def prepare_wdbc(content: bytes) -> pd.DataFrame:
    names = ["id", "diagnosis"] + [
        f"{kind}_{measure}" for kind in ("mean", "se", "worst") for measure in WDBC_MEASURES
    ]
    frame = pd.read_csv(io.BytesIO(content), header=None, names=names)
    frame["diagnosis"] = frame["diagnosis"].map({"M": 1, "B": 0})
    return frame


def prepare_advertisements(content: bytes) -> pd.DataFrame:
    frame = pd.read_csv(io.BytesIO(content), header=None, dtype=str, skipinitialspace=True)
    frame.columns = [f"a{j}" for j in range(frame.shape[1] - 1)] + ["class"]
    frame["class"] = frame["class"].str.strip().map({"ad.": 1, "nonad.": 0})
    return frame.apply(lambda column: column.str.strip() if column.dtype == object else column)


def prepare_forest_fires(content: bytes) -> pd.DataFrame:
    frame = pd.read_csv(io.BytesIO(content))
    frame["month"] = frame["month"].str.lower().map(MONTHS)
    frame["day"] = frame["day"].str.lower().map(WEEKDAYS)
    return frame


def prepare_blog_feedback(content: bytes) -> pd.DataFrame:
    with zipfile.ZipFile(io.BytesIO(content)) as archive:
        with archive.open("blogData_train.csv") as handle:
            frame = pd.read_csv(handle, header=None)
    frame.columns = [f"f{j}" for j in range(frame.shape[1] - 1)] + ["comments_next_24h"]
    return frame


def prepare_gesture_phase(content: bytes) -> pd.DataFrame:
    parts = []
    with zipfile.ZipFile(io.BytesIO(content)) as archive:
        for member in sorted(name for name in archive.namelist() if name.endswith("_va3.csv")):
            with archive.open(member) as handle:
                parts.append(pd.read_csv(handle))
    frame = pd.concat(parts, ignore_index=True)
    frame.columns = [str(c).strip() for c in frame.columns]
    label = frame.columns[-1]
    frame[label] = frame[label].astype(str).str.strip().map(GESTURE_PHASES)
    return frame.rename(columns={label: "phase"})


def prepare_connect4(content: bytes) -> pd.DataFrame:
    frame = pd.read_csv(io.BytesIO(content), header=None)
    frame.columns = [f"cell{j}" for j in range(frame.shape[1] - 1)] + ["outcome"]
    cells = frame.columns[:-1]
    frame[cells] = frame[cells].replace({"x": 1, "o": 2, "b": 3})
    frame["outcome"] = frame["outcome"].map({"win": 1, "loss": 0, "draw": 2})
    return frame


PREPARERS: Dict[str, Callable[[bytes], pd.DataFrame]] = {
    "wdbc": prepare_wdbc,
    "advertisements": prepare_advertisements,
    "forest_fires": prepare_forest_fires,
    "blog_feedback": prepare_blog_feedback,
    "gesture_phase": prepare_gesture_phase,
    "connect4": prepare_connect4,
}


def prepare(entry: CatalogEntry, data_dir: Path, force: bool) -> bool:
    target = data_dir / entry.file_name
    if target.exists() and not force:
        stderr_console.print(f"{entry.name}: {target} already present")
        return True

    raw_dir = data_dir / "raw"
    if entry.name == "connect4":
        # .Z (unix compress) has no reader in the standard library or our stack
        uncompressed = raw_dir / "connect-4.data"
        if not uncompressed.exists():
            stderr_console.print(
                f"[yellow]{entry.name}[/yellow]: download {entry.source_url}, uncompress it and "
                f"save it as {uncompressed}, then rerun"
            )
            return False
        content = uncompressed.read_bytes()
    else:
        content = raw_bytes(entry, raw_dir)
        if content is None:
            return False

    frame = PREPARERS[entry.name](content)
    target.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(target, index=False, na_rep="?")
    stderr_console.print(f"[green]{entry.name}[/green]: {frame.shape[0]} rows written to {target}")
    return True


@app.command()
def main(
    names: Annotated[Optional[List[str]], typer.Argument(help="Datasets to prepare (default: all)")] = None,
    data_dir: Annotated[Optional[Path], typer.Option("--data-dir", help="Target directory")] = None,
    force: Annotated[bool, typer.Option("--force", help="Rewrite CSVs that already exist")] = False,
):
    setup_logging("INFO")
    if data_dir is None:
        config.ensure_directories()
        data_dir = config.DATA_DIR
    try:
        entries = [catalog_entry(name) for name in names] if names else CATALOG
    except KeyError as e:
        stderr_console.print(f"[red]error:[/red] {e.args[0]}")
        raise typer.Exit(code=1)

    failed = [entry.name for entry in entries if not prepare(entry, data_dir, force)]
    if failed:
        stderr_console.print(f"Not prepared: {', '.join(failed)}")
        raise typer.Exit(code=1)


if __name__ == "__main__":
    app()

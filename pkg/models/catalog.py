from typing import List, Optional

from pydantic import BaseModel, Field

from models.dataset import ColumnKind


class CatalogEntry(BaseModel):
    """A benchmark dataset: where it comes from and how its prepared CSV is read."""
    name: str
    file_name: str
    label_column: str
    source_url: Optional[str] = None
    samples: int
    features: int
    label_kind: ColumnKind
    drop_columns: List[str] = Field(default_factory=list)
    notes: str = ""


CATALOG: List[CatalogEntry] = [
    CatalogEntry(
        name="advertisements",
        file_name="advertisements.csv",
        label_column="class",
        source_url="https://archive.ics.uci.edu/ml/machine-learning-databases/internet_ads/ad.data",
        samples=3279,
        features=1558,
        label_kind=ColumnKind.BINARY,
        notes="ad. -> 1, nonad. -> 0; rows with missing geometry are dropped at load time",
    ),
    CatalogEntry(
        name="blog_feedback",
        file_name="blog_feedback.csv",
        label_column="comments_next_24h",
        source_url="https://archive.ics.uci.edu/ml/machine-learning-databases/00304/BlogFeedback.zip",
        samples=52397,
        features=280,
        label_kind=ColumnKind.REAL,
        notes="training file only (blogData_train.csv); the dated test files are not used",
    ),
    CatalogEntry(
        name="wdbc",
        file_name="wdbc.csv",
        label_column="diagnosis",
        source_url="https://archive.ics.uci.edu/ml/machine-learning-databases/breast-cancer-wisconsin/wdbc.data",
        samples=569,
        features=30,
        label_kind=ColumnKind.BINARY,
        drop_columns=["id"],
        notes="M -> 1, B -> 0; the id column is dropped",
    ),
    CatalogEntry(
        name="connect4",
        file_name="connect4.csv",
        label_column="outcome",
        source_url="https://archive.ics.uci.edu/ml/machine-learning-databases/connect-4/connect-4.data.Z",
        samples=67557,
        features=42,
        label_kind=ColumnKind.INTEGER,
        notes="x/o/b -> 1/2/3, win/loss/draw -> 1/0/2; the .Z archive must be uncompressed by hand",
    ),
    CatalogEntry(
        name="forest_fires",
        file_name="forest_fires.csv",
        label_column="area",
        source_url="https://archive.ics.uci.edu/ml/machine-learning-databases/forest-fires/forestfires.csv",
        samples=517,
        features=12,
        label_kind=ColumnKind.REAL,
        notes="month and day names become 1..12 and 1..7",
    ),
    CatalogEntry(
        name="gesture_phase",
        file_name="gesture_phase.csv",
        label_column="phase",
        source_url="https://archive.ics.uci.edu/ml/machine-learning-databases/00302/gesture_phase_dataset.zip",
        samples=9900,
        features=32,
        label_kind=ColumnKind.INTEGER,
        notes="the processed *_va3.csv files, phases D/P/S/H/R -> 0..4",
    ),
]


def catalog_entry(name: str) -> CatalogEntry:
    for entry in CATALOG:
        if entry.name == name:
            return entry
    raise KeyError(f"Unknown dataset {name!r}; known: {', '.join(entry.name for entry in CATALOG)}")

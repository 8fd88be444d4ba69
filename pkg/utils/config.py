import os
from dotenv import load_dotenv
from pathlib import Path

load_dotenv()

class Config:

    TOOL_VERSION = "0.1.0"

    # Discretization Settings
    BINS = int(os.getenv("CEFS_BINS", "10"))
    LABEL_BINS = int(os.getenv("CEFS_LABEL_BINS", "5"))
    INTEGER_MAX_LEVELS = int(os.getenv("CEFS_INTEGER_MAX_LEVELS", "32"))

    # Split Settings
    TRAIN_FRACTION = float(os.getenv("CEFS_TRAIN_FRACTION", "0.9"))
    SEED = int(os.getenv("CEFS_SEED", "0"))

    # Cross-Entropy Settings
    RHO_COEFFICIENT = float(os.getenv("CEFS_RHO_COEFFICIENT", "0.05"))
    EPSILON = float(os.getenv("CEFS_EPSILON", "0.05"))
    LAG = int(os.getenv("CEFS_LAG", "5"))
    MAX_ITERS = int(os.getenv("CEFS_MAX_ITERS", "200"))
    P_INIT = float(os.getenv("CEFS_P_INIT", "0.5"))
    SMOOTHING_ALPHA = float(os.getenv("CEFS_SMOOTHING_ALPHA", "1.0"))
    SIZE_PENALTY = float(os.getenv("CEFS_SIZE_PENALTY", "0.0"))
    N_JOBS = int(os.getenv("CEFS_N_JOBS", "1"))

    # Evaluation Settings
    KNN_NEIGHBORS = int(os.getenv("CEFS_KNN_NEIGHBORS", "3"))
    VARIANCE_FLOOR = float(os.getenv("CEFS_VARIANCE_FLOOR", "1e-9"))

    LOG_LEVEL = os.getenv("CEFS_LOG_LEVEL", "WARNING")

    #Paths
    BASE_DIR = Path(__file__).parent.parent
    DATA_DIR = Path(os.getenv("CEFS_DATA_DIR", str(BASE_DIR / "data")))

    @classmethod
    def validate(cls):
        """Validate the numeric settings read from the environment."""
        problems = []
        if cls.BINS < 2:
            problems.append("CEFS_BINS must be at least 2")
        if cls.LABEL_BINS < 2:
            problems.append("CEFS_LABEL_BINS must be at least 2")
        if not 0.0 < cls.TRAIN_FRACTION <= 1.0:
            problems.append("CEFS_TRAIN_FRACTION must lie in (0, 1]")
        if not 0.0 < cls.P_INIT < 1.0:
            problems.append("CEFS_P_INIT must lie in (0, 1)")
        if not 0.0 < cls.SMOOTHING_ALPHA <= 1.0:
            problems.append("CEFS_SMOOTHING_ALPHA must lie in (0, 1]")
        if cls.EPSILON <= 0.0:
            problems.append("CEFS_EPSILON must be positive")
        if cls.LAG < 1:
            problems.append("CEFS_LAG must be at least 1")
        if cls.SIZE_PENALTY < 0.0:
            problems.append("CEFS_SIZE_PENALTY must not be negative")

        if problems:
            raise ValueError(
                "Invalid configuration:\n  " + "\n  ".join(problems) +
                "\nPlease fix them in your .env file or environment"
            )
        return True

    @classmethod
    def ensure_directories(cls):
        """Ensure the data directory exists."""
        cls.DATA_DIR.mkdir(parents=True, exist_ok=True)
        return True

    @classmethod
    def snapshot(cls) -> dict:
        """Settings as plain values, for run manifests."""
        return {
            name: (str(value) if isinstance(value, Path) else value)
            for name, value in vars(cls).items()
            if name.isupper() and name != "BASE_DIR"
        }

config = Config()

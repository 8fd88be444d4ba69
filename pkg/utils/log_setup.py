"""Logging setup shared by the command-line entry points."""
import logging
from typing import Optional, Union

from rich.console import Console
from rich.logging import RichHandler

from utils.config import config

# Results go to standard output; logs and errors go here.
stderr_console = Console(stderr=True)


def setup_logging(level: Optional[Union[int, str]] = None) -> None:
    level = level or config.LOG_LEVEL
    if isinstance(level, str):
        level = level.upper()
    root = logging.getLogger()
    for handler in list(root.handlers):
        if isinstance(handler, RichHandler):
            root.removeHandler(handler)
    handler = RichHandler(console=stderr_console, show_path=False, rich_tracebacks=False)
    handler.setFormatter(logging.Formatter("%(name)s: %(message)s"))
    root.addHandler(handler)
    root.setLevel(level)

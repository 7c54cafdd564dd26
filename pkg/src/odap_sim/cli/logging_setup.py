import logging
from pathlib import Path
import sys
from typing import Optional, Union


DEFAULT_LOG_FILE = "logs/odap_sim.log"
LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


def configure_logging(
    level: Union[str, int] = "INFO", log_file: Optional[str] = DEFAULT_LOG_FILE
) -> None:
    """Diagnostics go to stderr (and the log file); stdout carries results only."""
    handlers = [logging.StreamHandler(sys.stderr)]
    if log_file:
        Path(log_file).parent.mkdir(parents=True, exist_ok=True)
        handlers.append(logging.FileHandler(log_file, mode="a"))

    logging.basicConfig(
        level=level.upper() if isinstance(level, str) else level,
        format=LOG_FORMAT,
        handlers=handlers,
        force=True,
    )

from dataclasses import dataclass
import logging
import os
from typing import Optional

from dotenv import load_dotenv

from ..engine import DEFAULT_EVENT_LIMIT
from ..errors import ConfigurationError
from ..sweep.plan import DEFAULT_PATTERN_CAP


logger = logging.getLogger(__name__)

ENV_FILE = ".envrc"


def _int_env(name: str, default: int) -> int:
    raw = os.getenv(name)
    if raw is None or raw == "":
        return default
    try:
        return int(raw)
    except ValueError:
        raise ConfigurationError(f"{name} must be an integer, got {raw!r}") from None


@dataclass(frozen=True)
class Settings:
    log_level: str = "INFO"
    jobs: int = 1
    pattern_cap: int = DEFAULT_PATTERN_CAP
    event_limit: int = DEFAULT_EVENT_LIMIT

    @classmethod
    def from_env(cls, env_file: Optional[str] = ENV_FILE) -> "Settings":
        if env_file:
            load_dotenv(env_file)
        return cls(
            log_level=os.getenv("ODAP_SIM_LOG_LEVEL", "INFO"),
            jobs=_int_env("ODAP_SIM_JOBS", 1),
            pattern_cap=_int_env("ODAP_SIM_PATTERN_CAP", DEFAULT_PATTERN_CAP),
            event_limit=_int_env("ODAP_SIM_EVENT_LIMIT", DEFAULT_EVENT_LIMIT),
        )

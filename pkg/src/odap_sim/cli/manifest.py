"""Run manifests written next to every command output."""

from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from .. import __version__
from ..errors import ManifestMismatchError, OutputExistsError


logger = logging.getLogger(__name__)

MANIFEST_SUFFIX = ".manifest.json"


def utc_now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def manifest_path(output: Union[str, Path]) -> Path:
    return Path(f"{output}{MANIFEST_SUFFIX}")


def check_output(path: Union[str, Path], force: bool) -> Path:
    path = Path(path)
    if path.exists() and not force:
        raise OutputExistsError(f"{path} exists; pass --force to overwrite")
    return path


@dataclass
class RunManifest:
    command: str
    scenario_path: str
    scenario_sha256: str
    plan: Dict[str, Any] = field(default_factory=dict)
    outputs: List[str] = field(default_factory=list)
    tool_version: str = __version__
    started_at: str = field(default_factory=utc_now)
    finished_at: Optional[str] = None

    def finish(self, *outputs: Union[str, Path]) -> "RunManifest":
        self.outputs.extend(str(p) for p in outputs)
        self.finished_at = utc_now()
        return self

    def write(self, output: Union[str, Path]) -> Path:
        path = manifest_path(output)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(asdict(self), indent=2) + "\n", encoding="utf-8")
        logger.debug(f"📁 Wrote manifest {path}")
        return path

    @classmethod
    def load(cls, output: Union[str, Path]) -> Optional["RunManifest"]:
        path = manifest_path(output)
        if not path.exists():
            return None
        return cls(**json.loads(path.read_text(encoding="utf-8")))


def verify_scenario(
    output: Union[str, Path], scenario_sha256: str, unsafe: bool = False
) -> Optional[RunManifest]:
    """Refuse an output produced from a different scenario unless ``unsafe``."""
    manifest = RunManifest.load(output)
    if manifest is None:
        logger.warning(f"⚠️ No manifest next to {output}; scenario hash not checked")
        return None
    if manifest.scenario_sha256 != scenario_sha256:
        message = (
            f"{output} was produced from scenario {manifest.scenario_sha256[:12]}, "
            f"not {scenario_sha256[:12]}"
        )
        if not unsafe:
            raise ManifestMismatchError(f"{message}; pass --unsafe to analyze anyway")
        logger.warning(f"⚠️ {message} (--unsafe)")
    return manifest

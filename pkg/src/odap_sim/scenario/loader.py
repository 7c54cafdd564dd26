import hashlib
from importlib import resources
import json
import logging
from pathlib import Path
from typing import Any, Dict, Tuple

from pydantic import ValidationError

from ..errors import ScenarioParseError, ScenarioValidationError
from .models import Scenario


logger = logging.getLogger(__name__)

BUNDLED_PACKAGE = "odap_sim.scenario.data"
DEFAULT_SCENARIO = "case_study_fig2"


def _format_validation_error(error: ValidationError) -> str:
    lines = []
    for item in error.errors():
        location = ".".join(str(part) for part in item["loc"]) or "<scenario>"
        message = item["msg"].removeprefix("Value error, ")
        lines.append(f"{location}: {message}")
    return "; ".join(lines)


def parse_json(text: str, source: str = "<text>") -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise ScenarioParseError(e.msg, e.lineno, e.colno, source) from e


def load_scenario(config_text: str, source: str = "<text>") -> Scenario:
    data = parse_json(config_text, source)
    if not isinstance(data, dict):
        raise ScenarioParseError("top level must be an object", 1, 1, source)
    try:
        scenario = Scenario.model_validate(data)
    except ValidationError as e:
        raise ScenarioValidationError(
            f"{source}: {_format_validation_error(e)}"
        ) from e
    logger.debug(
        f"📁 Loaded scenario {scenario.name} from {source} "
        f"(k={scenario.catalog.k}, machines={len(scenario.machines)})"
    )
    return scenario


def dump_scenario(scenario: Scenario) -> str:
    return json.dumps(scenario.model_dump(mode="json"), indent=2) + "\n"


def bundled_path(name: str) -> Path:
    return Path(str(resources.files(BUNDLED_PACKAGE).joinpath(f"{name}.json")))


def resolve_path(path_or_name: str) -> Path:
    """A bare bundled name (``case_study_fig2``) wins over a relative path."""
    candidate = bundled_path(path_or_name)
    if "/" not in path_or_name and not path_or_name.endswith(".json") and candidate.exists():
        return candidate
    return Path(path_or_name)


def read_scenario_file(path_or_name: str) -> Tuple[Scenario, str]:
    path = resolve_path(path_or_name)
    text = path.read_text(encoding="utf-8")
    return load_scenario(text, source=str(path)), text


def load_scenario_file(path_or_name: str = DEFAULT_SCENARIO) -> Scenario:
    return read_scenario_file(path_or_name)[0]


def default_scenario() -> Scenario:
    return load_scenario_file(DEFAULT_SCENARIO)


def sha256_text(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def update_scenario(scenario: Scenario, **sections: Dict[str, Any]) -> Scenario:
    """Return a revalidated copy with the given sections' keys patched.

    ``update_scenario(s, product={"transfer_mode": "whole_fragment"})`` merges
    into ``product``; list-valued sections are replaced wholesale.
    """
    data = scenario.model_dump(mode="json")
    for section, changes in sections.items():
        if isinstance(data.get(section), dict) and isinstance(changes, dict):
            data[section] = {**data[section], **changes}
        else:
            data[section] = changes
    try:
        return Scenario.model_validate(data)
    except ValidationError as e:
        raise ScenarioValidationError(_format_validation_error(e)) from e

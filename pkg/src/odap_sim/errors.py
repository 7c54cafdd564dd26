from typing import Any, Dict, List, Optional


class OdapSimError(Exception):
    exit_code = 1


class ScenarioParseError(OdapSimError):
    exit_code = 2

    def __init__(self, message: str, line: int, column: int, source: str = "<text>"):
        super().__init__(f"{source}:{line}:{column}: {message}")
        self.line = line
        self.column = column
        self.source = source


class ScenarioValidationError(OdapSimError):
    exit_code = 3


class PatternParseError(OdapSimError):
    exit_code = 2


class ConfigurationError(OdapSimError):
    exit_code = 3


class CalibrationError(OdapSimError):
    def __init__(self, message: str, residuals: Optional[List[Dict[str, Any]]] = None):
        super().__init__(message)
        self.residuals = residuals or []


class SchedulingError(OdapSimError):
    pass


class LivelockError(OdapSimError):
    pass


class EngineInvariantError(OdapSimError):
    pass


class WorkflowError(OdapSimError):
    exit_code = 3


class PatternSpaceError(OdapSimError):
    exit_code = 2


class SweepError(OdapSimError):
    def __init__(
        self,
        reason: str,
        pattern_id: int,
        throughput_bps: float,
        replicate: int,
        seed: int,
    ):
        super().__init__(
            f"simulation failed at pattern_id={pattern_id} "
            f"throughput_bps={throughput_bps:g} replicate={replicate} seed={seed}: "
            f"{reason}"
        )
        self.reason = reason
        self.pattern_id = pattern_id
        self.throughput_bps = throughput_bps
        self.replicate = replicate
        self.seed = seed


class ModelFitError(OdapSimError):
    pass


class ManifestMismatchError(OdapSimError):
    exit_code = 3


class OutputExistsError(OdapSimError):
    exit_code = 2

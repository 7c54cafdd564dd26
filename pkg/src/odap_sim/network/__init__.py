from .calibration import (
    CALIBRATABLE,
    DEFAULT_FREE,
    CalibrationReport,
    RttTarget,
    apply_parameters,
    calibrate,
    load_targets,
)
from .rtt import (
    Propagation,
    ReadTiming,
    RttModel,
    RttParameters,
    RttSample,
    WriteTiming,
    product_access_time,
)


__all__ = [
    "CALIBRATABLE",
    "DEFAULT_FREE",
    "CalibrationReport",
    "Propagation",
    "ReadTiming",
    "RttModel",
    "RttParameters",
    "RttSample",
    "RttTarget",
    "WriteTiming",
    "apply_parameters",
    "calibrate",
    "load_targets",
    "product_access_time",
]

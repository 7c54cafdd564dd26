from .calibration import (
    MakespanCalibration,
    calibrate_odap,
    calibrate_oper_time,
    mean_makespan,
)
from .tokens import DbState, ProductToken, commit_write
from .workflow import (
    Access,
    AccessLists,
    SimulationResult,
    StageRun,
    StageStats,
    SupplyChainSimulation,
    run_simulation,
    split_access_lists,
)


__all__ = [
    "Access",
    "AccessLists",
    "DbState",
    "MakespanCalibration",
    "ProductToken",
    "SimulationResult",
    "StageRun",
    "StageStats",
    "SupplyChainSimulation",
    "calibrate_odap",
    "calibrate_oper_time",
    "commit_write",
    "mean_makespan",
    "run_simulation",
    "split_access_lists",
]

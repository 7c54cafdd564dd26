from .commands import (
    cmd_analyze,
    cmd_calibrate,
    cmd_plot_data,
    cmd_simulate,
    cmd_sweep,
    parse_throughput,
)
from .logging_setup import configure_logging
from .manifest import RunManifest, manifest_path
from .settings import Settings


__all__ = [
    "RunManifest",
    "Settings",
    "cmd_analyze",
    "cmd_calibrate",
    "cmd_plot_data",
    "cmd_simulate",
    "cmd_sweep",
    "configure_logging",
    "manifest_path",
    "parse_throughput",
]

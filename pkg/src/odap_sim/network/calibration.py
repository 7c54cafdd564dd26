"""Least-squares fit of the RTT model's timing parameters to measured means."""

from dataclasses import dataclass, field, replace
import logging
from typing import Any, Dict, List, Sequence, Tuple

import numpy as np

from ..errors import CalibrationError, ConfigurationError
from ..scenario.loader import update_scenario
from ..scenario.models import Scenario
from .rtt import RttModel, RttParameters


logger = logging.getLogger(__name__)

CALIBRATABLE = (
    "per_hop_latency_s",
    "server_processing_s",
    "read_overhead_s",
    "write_overhead_s",
)
# read_overhead_s is left out: it is collinear with server_processing_s
DEFAULT_FREE = ("per_hop_latency_s", "server_processing_s", "write_overhead_s")


@dataclass(frozen=True)
class RttTarget:
    machine: str
    db: str
    fragment: str
    op: str
    mean_s: float

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "RttTarget":
        unknown = set(data) - {"machine", "db", "fragment", "op", "mean_s"}
        if unknown:
            raise ConfigurationError(f"unknown target keys: {', '.join(sorted(unknown))}")
        try:
            target = cls(
                machine=str(data["machine"]),
                db=str(data["db"]),
                fragment=str(data["fragment"]),
                op=str(data["op"]),
                mean_s=float(data["mean_s"]),
            )
        except KeyError as e:
            raise ConfigurationError(f"target is missing key {e.args[0]}") from e
        if target.op not in ("read", "write"):
            raise ConfigurationError(f"target op must be read or write, got {target.op}")
        if target.mean_s <= 0:
            raise ConfigurationError(f"target mean must be positive, got {target.mean_s}")
        return target

    @property
    def label(self) -> str:
        return f"{self.machine}->{self.db} {self.fragment} {self.op}"


@dataclass(frozen=True)
class TargetFit:
    target: RttTarget
    predicted_s: float
    relative_error: float
    within_tolerance: bool


@dataclass
class CalibrationReport:
    parameters: RttParameters
    free: Tuple[str, ...]
    fits: List[TargetFit] = field(default_factory=list)
    tolerance: float = 0.10

    @property
    def all_within_tolerance(self) -> bool:
        return all(fit.within_tolerance for fit in self.fits)

    @property
    def max_relative_error(self) -> float:
        return max((abs(fit.relative_error) for fit in self.fits), default=0.0)

    def residual_rows(self) -> List[Dict[str, Any]]:
        return [
            {
                "target": fit.target.label,
                "target_s": fit.target.mean_s,
                "predicted_s": fit.predicted_s,
                "residual_s": fit.predicted_s - fit.target.mean_s,
                "relative_error": fit.relative_error,
            }
            for fit in self.fits
        ]

    def render(self) -> str:
        lines = ["parameter                value", "-" * 40]
        for name in CALIBRATABLE:
            marker = " *" if name in self.free else ""
            lines.append(f"{name:<24} {getattr(self.parameters, name):.6g}{marker}")
        lines.append("")
        lines.append(
            f"{'target':<24} {'target_ms':>10} {'model_ms':>10} {'rel_err':>8}  ok"
        )
        lines.append("-" * 60)
        for fit in self.fits:
            lines.append(
                f"{fit.target.label:<24} {fit.target.mean_s * 1e3:>10.3f} "
                f"{fit.predicted_s * 1e3:>10.3f} {fit.relative_error:>8.2%}  "
                f"{'yes' if fit.within_tolerance else 'NO'}"
            )
        return "\n".join(lines)


def load_targets(entries: Sequence[Dict[str, Any]]) -> List[RttTarget]:
    return [RttTarget.from_dict(entry) for entry in entries]


def _predict(model: RttModel, params: RttParameters, target: RttTarget) -> float:
    return model.with_parameters(params).target_base(
        target.machine, target.db, target.fragment, target.op
    )


def _report(
    model: RttModel,
    params: RttParameters,
    targets: Sequence[RttTarget],
    free: Tuple[str, ...],
    tolerance: float,
) -> CalibrationReport:
    fits = []
    for target in targets:
        predicted = _predict(model, params, target)
        error = (predicted - target.mean_s) / target.mean_s
        fits.append(TargetFit(target, predicted, error, abs(error) <= tolerance))
    return CalibrationReport(params, free, fits, tolerance)


def calibrate(
    model: RttModel,
    targets: Sequence[RttTarget],
    free: Sequence[str] = DEFAULT_FREE,
    tolerance: float = 0.10,
) -> CalibrationReport:
    """Solve for the free parameters so deterministic RTTs match the target means.

    Every RTT is affine in the timing parameters, so the design row of a
    target is read off by evaluating the model at unit parameter vectors.
    """
    free = tuple(free)
    for name in free:
        if name not in CALIBRATABLE:
            raise ConfigurationError(f"parameter {name} cannot be calibrated")
    if not targets or not free:
        logger.info("📐 No calibration targets, parameters unchanged")
        return _report(model, model.params, targets, free, tolerance)

    zero = replace(model.params, **dict.fromkeys(free, 0.0))
    design = np.zeros((len(targets), len(free)))
    offsets = np.zeros(len(targets))
    for row, target in enumerate(targets):
        offsets[row] = _predict(model, zero, target)
        for col, name in enumerate(free):
            unit = replace(zero, **{name: 1.0})
            design[row, col] = _predict(model, unit, target) - offsets[row]

    observed = np.array([t.mean_s for t in targets])
    solution, *_ = np.linalg.lstsq(design, observed - offsets, rcond=None)
    params = replace(
        model.params, **{name: float(value) for name, value in zip(free, solution)}
    )
    report = _report(model, params, targets, free, tolerance)

    negative = [name for name, value in zip(free, solution) if value < 0]
    if negative:
        raise CalibrationError(
            f"infeasible targets: negative solution for {', '.join(negative)}",
            residuals=report.residual_rows(),
        )
    if not report.all_within_tolerance:
        logger.warning(
            f"⚠️ Best fit leaves residuals above {tolerance:.0%} "
            f"(max {report.max_relative_error:.2%})"
        )
    logger.info(
        f"✅ Calibrated {len(free)} parameters on {len(targets)} targets "
        f"(max error {report.max_relative_error:.2%})"
    )
    return report


def apply_parameters(scenario: Scenario, params: RttParameters) -> Scenario:
    return update_scenario(scenario, topology=params.topology_update())

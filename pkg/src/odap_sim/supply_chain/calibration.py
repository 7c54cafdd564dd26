"""Root-finding of unpublished workflow constants against reference makespans."""

from dataclasses import dataclass
import logging
from typing import Callable, Tuple

import numpy as np
from scipy.optimize import brentq

from ..errors import CalibrationError, ConfigurationError
from ..network.rtt import RttModel
from ..scenario.loader import update_scenario
from ..scenario.models import Scenario
from ..scenario.patterns import DistributionPattern
from ..seeding import derive_seed
from .workflow import run_simulation


logger = logging.getLogger(__name__)

DEFAULT_ODA_MAKESPAN_S = 147.0
DEFAULT_ODAP_RATIO = 7.1
DEFAULT_ODAP_THROUGHPUT_BPS = 1_000_000.0


@dataclass(frozen=True)
class MakespanCalibration:
    parameter: str
    value: float
    target: float
    achieved: float
    evaluations: int

    @property
    def relative_error(self) -> float:
        return (self.achieved - self.target) / self.target


def mean_makespan(
    scenario: Scenario,
    pattern: DistributionPattern,
    throughput_bps: float,
    replicates: int = 3,
    base_seed: int = 0,
) -> float:
    if replicates < 1:
        raise ConfigurationError(f"replicates must be at least 1, got {replicates}")
    model = RttModel.from_scenario(scenario)
    makespans = [
        run_simulation(
            scenario,
            pattern,
            throughput_bps=throughput_bps,
            seed=derive_seed(base_seed, pattern.pattern_id, throughput_bps, replicate),
            rtt_model=model,
        ).makespan_s
        for replicate in range(replicates)
    ]
    return float(np.mean(makespans))


def _solve(
    objective: Callable[[float], float], lo: float, hi: float, label: str
) -> Tuple[float, int]:
    f_lo, f_hi = objective(lo), objective(hi)
    expansions = 0
    while f_lo < 0 and f_hi < 0 and expansions < 20:
        lo, f_lo = hi, f_hi
        hi *= 2
        f_hi = objective(hi)
        expansions += 1
    if f_lo * f_hi > 0:
        raise CalibrationError(
            f"{label}: target not bracketed by [{lo:g}, {hi:g}]",
            residuals=[{"bound": lo, "residual": f_lo}, {"bound": hi, "residual": f_hi}],
        )
    root, info = brentq(objective, lo, hi, xtol=1e-6 * max(1.0, hi), full_output=True)
    return float(root), info.function_calls + 2 + expansions


def calibrate_oper_time(
    scenario: Scenario,
    target_makespan_s: float = DEFAULT_ODA_MAKESPAN_S,
    stage: str = "sewing",
    replicates: int = 3,
    base_seed: int = 0,
) -> Tuple[Scenario, MakespanCalibration]:
    """Set the stage machine's operation time so the mean ODA makespan hits the target."""
    try:
        machine_id = next(s.machine for s in scenario.workflow.stages if s.name == stage)
    except StopIteration:
        raise ConfigurationError(f"unknown stage {stage}") from None
    oda = DistributionPattern.oda(scenario.catalog.k)
    throughput = scenario.product.throughput_bps

    def with_oper_time(value: float) -> Scenario:
        machines = [
            m.model_dump(mode="json") | ({"oper_time_s": value} if m.id == machine_id else {})
            for m in scenario.machines
        ]
        return update_scenario(scenario, machines=machines)

    def objective(value: float) -> float:
        candidate = with_oper_time(value)
        return mean_makespan(candidate, oda, throughput, replicates, base_seed) - target_makespan_s

    firings = scenario.workflow.target_count or 1
    logger.info(f"🚀 Calibrating {machine_id} oper_time for ODA makespan {target_makespan_s:g}s")
    value, evaluations = _solve(
        objective, 0.0, target_makespan_s / firings, f"oper_time of {machine_id}"
    )
    calibrated = with_oper_time(value)
    achieved = mean_makespan(calibrated, oda, throughput, replicates, base_seed)
    result = MakespanCalibration(
        f"{machine_id}.oper_time_s", value, target_makespan_s, achieved, evaluations
    )
    logger.info(
        f"✅ {result.parameter} = {value:.4f}s gives {achieved:.2f}s "
        f"({result.relative_error:+.2%})"
    )
    return calibrated, result


def calibrate_odap(
    scenario: Scenario,
    ratio: float = DEFAULT_ODAP_RATIO,
    throughput_bps: float = DEFAULT_ODAP_THROUGHPUT_BPS,
    replicates: int = 3,
    base_seed: int = 0,
) -> Tuple[Scenario, MakespanCalibration]:
    """Pick a uniform fragment payload so full-ODAP / ODA makespan equals ``ratio``.

    Product accesses switch to whole-fragment transfers; the ODA makespan does
    not depend on payload size, so it is simulated once.
    """
    if ratio <= 0:
        raise ConfigurationError(f"ratio must be positive, got {ratio}")
    base = update_scenario(scenario, product={"transfer_mode": "whole_fragment"})
    k = base.catalog.k
    oda_mean = mean_makespan(
        base, DistributionPattern.oda(k), throughput_bps, replicates, base_seed
    )
    full = DistributionPattern.full_odap(k)

    def with_payload(payload: float) -> Scenario:
        fragments = [
            f.model_dump(mode="json") | {"payload_bytes": max(1, round(payload))}
            for f in base.fragments
        ]
        return update_scenario(base, fragments=fragments)

    def objective(payload: float) -> float:
        odap_mean = mean_makespan(
            with_payload(payload), full, throughput_bps, replicates, base_seed
        )
        return odap_mean / oda_mean - ratio

    logger.info(
        f"🚀 Calibrating payload size for full-ODAP/ODA ratio {ratio:g} "
        f"at {throughput_bps:g} bps"
    )
    payload, evaluations = _solve(objective, 1.0, 1e6, "uniform payload_bytes")
    calibrated = with_payload(payload)
    achieved = (
        mean_makespan(calibrated, full, throughput_bps, replicates, base_seed) / oda_mean
    )
    result = MakespanCalibration(
        "payload_bytes", float(max(1, round(payload))), ratio, achieved, evaluations
    )
    logger.info(
        f"✅ payload_bytes = {result.value:.0f} gives ratio {achieved:.3f} "
        f"({result.relative_error:+.2%})"
    )
    return calibrated, result

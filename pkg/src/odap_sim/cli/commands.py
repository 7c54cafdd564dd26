"""Command implementations behind ``main.py``.

Every command returns a result dict: ``{"success": True, ...}`` or
``{"success": False, "error": ..., "exit_code": ...}``. Library errors never
escape; ``main`` turns the dict into output and an exit code.
"""

import logging
from pathlib import Path
import re
from typing import Any, Dict, Iterable, List, Optional, Sequence, Union

from ..engine import DEFAULT_EVENT_LIMIT, write_trace
from ..errors import CalibrationError, ConfigurationError, OdapSimError
from ..network.calibration import DEFAULT_FREE, apply_parameters, calibrate, load_targets
from ..network.rtt import RttModel
from ..scenario.loader import (
    DEFAULT_SCENARIO,
    dump_scenario,
    parse_json,
    read_scenario_file,
    resolve_path,
    sha256_text,
)
from ..scenario.patterns import resolve_pattern
from ..supply_chain.calibration import calibrate_odap, calibrate_oper_time
from ..supply_chain.workflow import run_simulation
from ..sweep.factorial import DEFAULT_ALPHA, fit_from_summary, select_significant
from ..sweep.plan import (
    DEFAULT_PATTERN_CAP,
    DEFAULT_REPLICATES,
    DEFAULT_THROUGHPUTS,
    SweepPlan,
)
from ..sweep.runner import read_sweep_csv, run_sweep
from ..sweep.stats import summarize
from .manifest import RunManifest, check_output, verify_scenario
from .reporting import (
    distribution_summary,
    oda_line_path,
    plot_data,
    render_distribution_summary,
)


logger = logging.getLogger(__name__)

DEFAULT_TARGETS = "reference_targets"
CALIBRATION_STAGES = ("rtt", "oper_time", "odap")

_THROUGHPUT = re.compile(r"\s*(\d+(?:\.\d*)?(?:[eE][+-]?\d+)?)\s*([kKmMgG]?)(?:bps)?\s*")
_MULTIPLIERS = {"": 1.0, "k": 1e3, "m": 1e6, "g": 1e9}

Throughput = Union[str, float, int]


def parse_throughput(value: Throughput) -> float:
    """``"1M"`` -> 1e6, ``"54M"`` -> 54e6, ``"250k"`` -> 250e3; numbers pass through."""
    if isinstance(value, (int, float)):
        throughput = float(value)
    else:
        match = _THROUGHPUT.fullmatch(value)
        if match is None:
            raise ConfigurationError(f"invalid throughput {value!r} (try 1M, 54M, 100M)")
        throughput = float(match.group(1)) * _MULTIPLIERS[match.group(2).lower()]
    if throughput <= 0:
        raise ConfigurationError(f"throughput must be positive, got {value!r}")
    return throughput


def _failure(error: Exception, exit_code: Optional[int] = None) -> Dict[str, Any]:
    logger.error(f"❌ {error}")
    return {
        "success": False,
        "error": str(error),
        "exit_code": exit_code if exit_code is not None else getattr(error, "exit_code", 1),
    }


def cmd_simulate(
    scenario: str = DEFAULT_SCENARIO,
    pattern: str = "ODA",
    throughput: Optional[Throughput] = None,
    seed: int = 0,
    trace_out: Optional[str] = None,
    force: bool = False,
    event_limit: int = DEFAULT_EVENT_LIMIT,
) -> Dict[str, Any]:
    try:
        loaded, text = read_scenario_file(scenario)
        distribution = resolve_pattern(pattern, loaded.catalog)
        throughput_bps = (
            parse_throughput(throughput)
            if throughput is not None
            else loaded.product.throughput_bps
        )
        if trace_out:
            check_output(trace_out, force)
        manifest = RunManifest(
            "simulate",
            scenario,
            sha256_text(text),
            {"pattern": distribution.bit_string, "throughput_bps": throughput_bps, "seed": seed},
        )

        logger.info(
            f"🚀 Simulating {distribution.describe(loaded.catalog)} "
            f"at {throughput_bps:g} bps (seed {seed})"
        )
        result = run_simulation(
            loaded,
            distribution,
            throughput_bps=throughput_bps,
            seed=seed,
            record_trace=bool(trace_out),
            event_limit=event_limit,
        )
        logger.info(f"✅ Makespan {result.makespan_s:.3f}s")

        trace_path = None
        if trace_out:
            trace_path = str(write_trace(result.trace, trace_out))
            manifest.finish(trace_path).write(trace_path)

        return {
            "success": True,
            "makespan_s": result.makespan_s,
            "pattern_id": distribution.pattern_id,
            "pattern": distribution.describe(loaded.catalog),
            "throughput_bps": throughput_bps,
            "seed": seed,
            "produced": result.produced,
            "events": result.statistics.events_processed,
            "consistency_violations": len(result.consistency_violations),
            "trace": trace_path,
        }
    except OdapSimError as e:
        return _failure(e)
    except OSError as e:
        return _failure(e, exit_code=2)


def cmd_sweep(
    out: str,
    scenario: str = DEFAULT_SCENARIO,
    throughputs: Optional[Iterable[Throughput]] = None,
    replicates: int = DEFAULT_REPLICATES,
    base_seed: int = 0,
    patterns: Optional[Sequence[str]] = None,
    jobs: int = 1,
    force: bool = False,
    pattern_cap: int = DEFAULT_PATTERN_CAP,
    event_limit: int = DEFAULT_EVENT_LIMIT,
) -> Dict[str, Any]:
    try:
        check_output(out, force)
        loaded, text = read_scenario_file(scenario)
        pattern_ids = None
        if patterns:
            pattern_ids = tuple(
                dict.fromkeys(resolve_pattern(p, loaded.catalog).pattern_id for p in patterns)
            )
        plan = SweepPlan(
            throughputs=tuple(
                parse_throughput(t) for t in (throughputs or DEFAULT_THROUGHPUTS)
            ),
            replicates=replicates,
            base_seed=base_seed,
            pattern_ids=pattern_ids,
        )
        manifest = RunManifest("sweep", scenario, sha256_text(text), plan.to_dict())

        result = run_sweep(
            loaded, plan, jobs=jobs, pattern_cap=pattern_cap, event_limit=event_limit
        )
        path = result.write_csv(out)
        manifest_file = manifest.finish(path).write(path)
        logger.info(f"📁 Wrote {len(result.records)} records to {path}")

        return {
            "success": True,
            "out": str(path),
            "rows": len(result.records),
            "manifest": str(manifest_file),
            "metrics": result.metrics,
        }
    except OdapSimError as e:
        return _failure(e)
    except OSError as e:
        return _failure(e, exit_code=2)


def cmd_analyze(
    sweep_csv: str,
    scenario: str = DEFAULT_SCENARIO,
    throughput: Optional[Throughput] = None,
    alpha: float = DEFAULT_ALPHA,
    max_level: int = 3,
    out: Optional[str] = None,
    unsafe: bool = False,
    force: bool = False,
) -> Dict[str, Any]:
    try:
        loaded, text = read_scenario_file(scenario)
        scenario_hash = sha256_text(text)
        verify_scenario(sweep_csv, scenario_hash, unsafe)
        frame = read_sweep_csv(sweep_csv)
        if frame.empty:
            raise ConfigurationError(f"sweep CSV {sweep_csv} has no records")

        summary = summarize(frame)
        fragment_ids = loaded.catalog.ids
        table = distribution_summary(summary, fragment_ids)
        throughput_bps = (
            parse_throughput(throughput)
            if throughput is not None
            else float(summary["throughput_bps"].min())
        )
        model = fit_from_summary(
            summary, throughput_bps, max_level, alpha, factor_names=fragment_ids
        )
        significant = select_significant(model)
        logger.info(
            f"📊 {len(significant)} of {len(model.terms) - 1} terms significant "
            f"at alpha={alpha:g} ({throughput_bps:g} bps)"
        )

        outputs: List[str] = []
        if out:
            table_path = Path(out).with_name(f"{Path(out).stem}_summary.csv")
            check_output(out, force)
            check_output(table_path, force)
            Path(out).parent.mkdir(parents=True, exist_ok=True)
            model.to_frame().to_csv(out, index=False, lineterminator="\n")
            table.to_csv(table_path, index=False, lineterminator="\n")
            outputs = [str(out), str(table_path)]
            RunManifest(
                "analyze",
                scenario,
                scenario_hash,
                {
                    "sweep_csv": str(sweep_csv),
                    "throughput_bps": throughput_bps,
                    "alpha": alpha,
                    "max_level": max_level,
                },
            ).finish(*outputs).write(out)

        return {
            "success": True,
            "throughput_bps": throughput_bps,
            "terms": len(model.terms),
            "full_factorial": model.full_factorial,
            "significant": significant,
            "factors": model.to_frame(),
            "summary": table,
            "summary_text": render_distribution_summary(table),
            "outputs": outputs,
        }
    except OdapSimError as e:
        return _failure(e)
    except OSError as e:
        return _failure(e, exit_code=2)


def cmd_plot_data(
    sweep_csv: str,
    out: str,
    throughput: Optional[Throughput] = None,
    force: bool = False,
) -> Dict[str, Any]:
    try:
        frame = read_sweep_csv(sweep_csv)
        if frame.empty:
            raise ConfigurationError(f"sweep CSV {sweep_csv} has no records")
        summary = summarize(frame)
        throughput_bps = (
            parse_throughput(throughput)
            if throughput is not None
            else float(summary["throughput_bps"].min())
        )
        curve, line = plot_data(summary, throughput_bps)

        line_path = oda_line_path(out)
        check_output(out, force)
        check_output(line_path, force)
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        curve.to_csv(out, index=False, lineterminator="\n")
        line.to_csv(line_path, index=False, lineterminator="\n")

        source = RunManifest.load(sweep_csv)
        RunManifest(
            "plot-data",
            source.scenario_path if source else "",
            source.scenario_sha256 if source else "",
            {"sweep_csv": str(sweep_csv), "throughput_bps": throughput_bps},
        ).finish(out, line_path).write(out)
        logger.info(f"📁 Wrote {len(curve)} points to {out} and {line_path}")

        return {
            "success": True,
            "out": str(out),
            "oda_line": str(line_path),
            "points": len(curve),
            "min_s": float(curve["makespan_s"].min()),
            "max_s": float(curve["makespan_s"].max()),
            "oda_s": float(line["makespan_s"].iloc[0]),
        }
    except OdapSimError as e:
        return _failure(e)
    except OSError as e:
        return _failure(e, exit_code=2)


def _read_targets(targets: str) -> Dict[str, Any]:
    path = resolve_path(targets)
    data = parse_json(path.read_text(encoding="utf-8"), source=str(path))
    if not isinstance(data, dict):
        raise ConfigurationError(f"{path}: targets must be an object")
    return data


def cmd_calibrate(
    out: str,
    scenario: str = DEFAULT_SCENARIO,
    targets: str = DEFAULT_TARGETS,
    stages: Sequence[str] = CALIBRATION_STAGES,
    free: Sequence[str] = DEFAULT_FREE,
    tolerance: float = 0.10,
    force: bool = False,
) -> Dict[str, Any]:
    """RTT parameters first, then the bottleneck operation time, then the payload size.

    A stage runs only when requested and its targets are present.
    """
    try:
        unknown = set(stages) - set(CALIBRATION_STAGES)
        if unknown:
            raise ConfigurationError(f"unknown calibration stage(s): {', '.join(sorted(unknown))}")
        check_output(out, force)
        loaded, text = read_scenario_file(scenario)
        spec = _read_targets(targets)
        replicates = int(spec.get("replicates", 3))
        base_seed = int(spec.get("base_seed", 0))

        rtt_targets = load_targets(spec.get("rtt", [])) if "rtt" in stages else []
        report = calibrate(RttModel.from_scenario(loaded), rtt_targets, free, tolerance)
        calibrated = apply_parameters(loaded, report.parameters) if rtt_targets else loaded

        makespan_fits = []
        if "oper_time" in stages and "oda_makespan_s" in spec:
            calibrated, fit = calibrate_oper_time(
                calibrated,
                float(spec["oda_makespan_s"]),
                stage=spec.get("stage", "sewing"),
                replicates=replicates,
                base_seed=base_seed,
            )
            makespan_fits.append(fit)
        if "odap" in stages and "odap" in spec:
            calibrated, fit = calibrate_odap(
                calibrated,
                float(spec["odap"]["ratio"]),
                float(spec["odap"].get("throughput_bps", 1_000_000)),
                replicates=replicates,
                base_seed=base_seed,
            )
            makespan_fits.append(fit)

        output = dump_scenario(calibrated) if (rtt_targets or makespan_fits) else text
        path = Path(out)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(output, encoding="utf-8")
        RunManifest(
            "calibrate",
            scenario,
            sha256_text(text),
            {"targets": targets, "stages": list(stages), "free": list(free)},
        ).finish(path).write(path)

        return {
            "success": True,
            "out": str(path),
            "report": report.render(),
            "within_tolerance": report.all_within_tolerance,
            "max_relative_error": report.max_relative_error,
            "makespan_fits": [
                {
                    "parameter": fit.parameter,
                    "value": fit.value,
                    "target": fit.target,
                    "achieved": fit.achieved,
                }
                for fit in makespan_fits
            ],
        }
    except CalibrationError as e:
        result = _failure(e)
        result["residuals"] = e.residuals
        return result
    except OdapSimError as e:
        return _failure(e)
    except OSError as e:
        return _failure(e, exit_code=2)

"""End-to-end checks of the case-study scenario against its reference numbers."""

import json

import numpy as np
import pytest

from odap_sim.cli.reporting import distribution_summary
from odap_sim.network import RttModel, calibrate, load_targets
from odap_sim.scenario import DistributionPattern, resolve_pattern
from odap_sim.scenario.loader import bundled_path
from odap_sim.supply_chain import mean_makespan
from odap_sim.sweep import (
    SweepPlan,
    fit_from_summary,
    run_sweep,
    select_significant,
)


ODA = DistributionPattern.oda(8)
FULL = DistributionPattern.full_odap(8)


def _targets():
    return json.loads(bundled_path("reference_targets").read_text())


class TestReferenceNumbers:
    def test_rtt_targets_within_two_percent(self, scenario):
        report = calibrate(RttModel.from_scenario(scenario), load_targets(_targets()["rtt"]))

        assert report.max_relative_error < 0.02

    def test_oda_makespan(self, scenario):
        makespan = mean_makespan(scenario, ODA, 1_000_000.0, replicates=10)

        assert makespan == pytest.approx(_targets()["oda_makespan_s"], rel=0.05)

    def test_oda_independent_of_throughput(self, scenario):
        makespans = {
            mean_makespan(scenario, ODA, throughput, replicates=3)
            for throughput in (1e6, 11e6, 54e6, 100e6)
        }

        # seeds depend on the throughput, so compare within jitter noise
        assert max(makespans) - min(makespans) < 0.5

    def test_full_odap_ratio_at_low_throughput(self, whole_fragment_scenario):
        oda = mean_makespan(whole_fragment_scenario, ODA, 1e6, replicates=3)
        full = mean_makespan(whole_fragment_scenario, FULL, 1e6, replicates=3)

        assert 6.0 <= full / oda <= 8.5

    def test_full_odap_ratio_at_high_throughput(self, whole_fragment_scenario):
        oda = mean_makespan(whole_fragment_scenario, ODA, 100e6, replicates=3)
        full = mean_makespan(whole_fragment_scenario, FULL, 100e6, replicates=3)

        assert full / oda == pytest.approx(1.0, abs=0.02)

    def test_single_fragment_on_product_matches_oda(self, scenario):
        f7 = resolve_pattern("F7", scenario.catalog)

        oda = mean_makespan(scenario, ODA, 1e6, replicates=3)
        hybrid = mean_makespan(scenario, f7, 1e6, replicates=3)

        assert abs(hybrid - oda) < 1.0


@pytest.fixture(scope="module")
def low_throughput_sweep(whole_fragment_scenario):
    plan = SweepPlan(throughputs=(1e6,), replicates=2)
    return run_sweep(whole_fragment_scenario, plan, jobs=2).summary()


@pytest.mark.slow
class TestExhaustiveSweep:
    def test_worst_pattern_is_full_odap(self, low_throughput_sweep, scenario):
        table = distribution_summary(low_throughput_sweep, scenario.catalog.ids)

        assert table["max_pattern_id"].iloc[0] == 255
        # every whole-fragment transfer at 1 Mbps costs far more than the DB access it replaces
        assert table["best_pattern_id"].iloc[0] == 0

    def test_every_fragment_slows_the_workflow(self, low_throughput_sweep, scenario):
        model = fit_from_summary(
            low_throughput_sweep, 1e6, factor_names=scenario.catalog.ids
        )
        significant = dict(select_significant(model))

        for fragment_id in scenario.catalog.ids:
            assert model.coefficient(fragment_id) >= 0
            assert fragment_id in significant

    def test_interactions_matter(self, low_throughput_sweep, scenario):
        model = fit_from_summary(
            low_throughput_sweep, 1e6, factor_names=scenario.catalog.ids
        )
        levels = [name.count("*") + 1 for name, _ in select_significant(model)]

        assert 2 in levels
        assert 3 in levels
        assert np.all(np.isfinite(model.p))

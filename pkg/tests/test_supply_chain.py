from collections import Counter
import json

import pytest

from odap_sim.errors import ConfigurationError, LivelockError, WorkflowError
from odap_sim.scenario import DistributionPattern, resolve_pattern, update_scenario
from odap_sim.scenario.loader import bundled_path, load_scenario
from odap_sim.supply_chain import (
    DbState,
    ProductToken,
    calibrate_odap,
    calibrate_oper_time,
    commit_write,
    run_simulation,
    split_access_lists,
)


THROUGHPUTS = (100e6, 54e6, 11e6, 1e6)


def _oda(scenario):
    return DistributionPattern.oda(scenario.catalog.k)


def _full(scenario):
    return DistributionPattern.full_odap(scenario.catalog.k)


class TestAccessLists:
    def test_oda_is_all_database(self, scenario):
        lists = split_access_lists(scenario.profile("M1"), _oda(scenario), scenario.catalog)

        assert lists.db_reads == {"F1": 540, "F4": 90, "F5": 54, "F8": 720}
        assert lists.product_reads == {}
        assert lists.product_writes == {}

    def test_mixed_pattern(self, scenario):
        pattern = resolve_pattern("F1 F5", scenario.catalog)

        lists = split_access_lists(scenario.profile("M1"), pattern, scenario.catalog)

        assert lists.product_reads == {"F1": 540, "F5": 54}
        assert lists.db_reads == {"F4": 90, "F8": 720}
        assert list(lists.product_reads) == ["F1", "F5"]
        assert lists.product_writes == {"F1": 286, "F5": 110}
        assert lists.db_writes == {"F3": 110, "F4": 220, "F8": 220}

    def test_full_odap_is_all_product(self, scenario):
        lists = split_access_lists(scenario.profile("M3"), _full(scenario), scenario.catalog)

        assert lists.db_reads == {}
        assert lists.db_writes == {}
        assert len(lists.product_reads) == 6

    def test_pattern_length_mismatch(self, scenario):
        with pytest.raises(ConfigurationError):
            split_access_lists(
                scenario.profile("M1"), DistributionPattern.oda(3), scenario.catalog
            )


class TestCommitWrite:
    def test_replicated_write_updates_all_hosts(self, scenario):
        state = DbState(scenario.catalog)

        version = commit_write(state, "F8", scenario.profile("M3"), ("DB1", "DB2"))

        assert version == 1
        assert state.version("DB1", "F8") == state.version("DB2", "F8") == 1
        assert state.inconsistent_fragments() == []

    def test_unreplicated_write(self, scenario):
        state = DbState(scenario.catalog)

        commit_write(state, "F1", scenario.profile("M3"), ("DB1",))

        assert state.version("DB1", "F1") == 1
        assert state.committed["F1"] == 1

    def test_product_write_only_touches_token(self, scenario):
        state = DbState(scenario.catalog)
        token = ProductToken.fresh("pt1", "pt1-1", ["F3"])

        commit_write(token, "F3", scenario.profile("M3"))

        assert token.versions == {"F3": 1}
        assert state.version("DB3", "F3") == 0

    def test_write_outside_update_profile(self, scenario):
        state = DbState(scenario.catalog)

        with pytest.raises(WorkflowError, match="does not update"):
            commit_write(state, "F2", scenario.profile("M1"), ("DB3",))

    def test_inconsistency_detected_only_when_quiescent(self, scenario):
        state = DbState(scenario.catalog)
        state.commit("F8", ("DB1",))
        state.start_propagation("F8")

        assert state.inconsistent_fragments() == []

        state.finish_propagation("F8")

        assert state.inconsistent_fragments() == ["F8"]


class TestRunSimulation:
    def test_target_zero(self, scenario):
        empty = update_scenario(scenario, workflow={"target_count": 0})

        result = run_simulation(empty, _oda(empty))

        assert result.makespan_s == 0.0
        assert result.statistics.events_processed == 0

    def test_token_conservation(self, scenario):
        result = run_simulation(scenario, _oda(scenario), seed=1)

        assert result.produced == {"pt1": 152, "pt2": 95, "headdress": 85}
        assert result.stage_stats["sewing"].completed == 85
        assert result.stage_stats["cutting1"].completed == 8

    def test_oda_is_throughput_invariant(self, scenario):
        makespans = {
            run_simulation(scenario, _oda(scenario), throughput_bps=t, seed=17).makespan_s
            for t in THROUGHPUTS
        }

        assert len(makespans) == 1

    def test_same_seed_same_trace(self, scenario):
        pattern = resolve_pattern("F6 F8", scenario.catalog)

        first = run_simulation(scenario, pattern, seed=3, record_trace=True)
        second = run_simulation(scenario, pattern, seed=3, record_trace=True)

        assert first.makespan_s == second.makespan_s
        assert first.trace == second.trace

    def test_replicas_stay_consistent_under_sync_writes(self, scenario):
        result = run_simulation(scenario, _oda(scenario), seed=2)

        assert result.consistency_violations == []
        assert result.db_versions[("DB1", "F8")] == result.db_versions[("DB2", "F8")]
        assert result.db_versions[("DB1", "F8")] > 0

    def test_async_replication_converges(self, scenario):
        lazy = update_scenario(scenario, replication={"mode": "pc-as"})

        result = run_simulation(lazy, _oda(lazy), seed=2, record_trace=True)

        assert result.consistency_violations == []
        assert any(r.event_kind == "propagate" for r in result.trace)

    def test_async_replication_is_not_slower(self, quiet_scenario):
        lazy = update_scenario(quiet_scenario, replication={"mode": "pc-as"})

        sync = run_simulation(quiet_scenario, _oda(quiet_scenario)).makespan_s
        asynchronous = run_simulation(lazy, _oda(lazy)).makespan_s

        assert asynchronous <= sync

    def test_synchronous_write_locks_every_replica(self, scenario):
        result = run_simulation(scenario, _oda(scenario), seed=4, record_trace=True)

        first_sewing = [r for r in result.trace if r.entity_id == "sewing#14"]
        held = {r.resource_id for r in first_sewing if r.event_kind == "acquire"}
        assert {"DB1", "DB2", "DB3", "M3"} <= held

    def test_trace_kinds_and_resource_balance(self, scenario):
        pattern = resolve_pattern("F1 F3", scenario.catalog)

        result = run_simulation(scenario, pattern, seed=5, record_trace=True)

        kinds = Counter(r.event_kind for r in result.trace)
        for kind in ("read_db", "read_product", "operate", "write_db", "write_product", "join"):
            assert kinds[kind] > 0
        assert kinds["join"] >= 85
        times = [r.time_s for r in result.trace]
        assert times == sorted(times)
        for stats in result.statistics.resources.values():
            assert 0.0 <= stats.utilization <= 1.0

    def test_full_odap_non_increasing_in_throughput(self, scenario):
        full = _full(scenario)

        makespans = [
            run_simulation(scenario, full, throughput_bps=t, seed=8).makespan_s
            for t in sorted(THROUGHPUTS)
        ]

        assert makespans == sorted(makespans, reverse=True)

    def test_full_odap_at_unbounded_throughput_beats_oda(self, scenario):
        oda = run_simulation(scenario, _oda(scenario), seed=1).makespan_s
        full = run_simulation(scenario, _full(scenario), throughput_bps=1e15, seed=1).makespan_s

        assert full <= oda

    def test_per_piece_writes_take_longer(self, quiet_scenario):
        per_piece = update_scenario(quiet_scenario, workflow={"write_granularity": "per_piece"})

        lot = run_simulation(quiet_scenario, _oda(quiet_scenario)).makespan_s
        piece = run_simulation(per_piece, _oda(per_piece)).makespan_s

        assert piece > lot

    def test_unallocated_fragment_on_database_side(self, scenario):
        raw = json.loads(bundled_path("case_study_fig2").read_text())
        raw["fragments"].append({"id": "F9", "payload_bytes": 100})
        raw["machines"][0]["reads"]["F9"] = 10
        extended = load_scenario(json.dumps(raw))

        on_product = DistributionPattern(tuple([False] * 8 + [True]))
        assert run_simulation(extended, on_product).makespan_s > 0

        with pytest.raises(ConfigurationError, match="not allocated"):
            run_simulation(extended, DistributionPattern.oda(9))

    def test_negative_seed(self, scenario):
        with pytest.raises(ConfigurationError, match="seed"):
            run_simulation(scenario, _oda(scenario), seed=-1)

    def test_event_limit(self, scenario):
        with pytest.raises(LivelockError):
            run_simulation(scenario, _oda(scenario), event_limit=100)


class TestMakespanCalibration:
    def test_oper_time_hits_target(self, quiet_scenario):
        calibrated, fit = calibrate_oper_time(quiet_scenario, 150.0, replicates=1)

        assert fit.parameter == "M3.oper_time_s"
        assert fit.achieved == pytest.approx(150.0, rel=0.01)
        assert calibrated.machine("M3").oper_time_s == pytest.approx(fit.value)

    def test_unknown_stage(self, scenario):
        with pytest.raises(ConfigurationError, match="unknown stage"):
            calibrate_oper_time(scenario, stage="dyeing")

    def test_odap_ratio(self, quiet_scenario):
        calibrated, fit = calibrate_odap(quiet_scenario, ratio=3.0, replicates=1)

        assert calibrated.product.transfer_mode == "whole_fragment"
        assert fit.achieved == pytest.approx(3.0, rel=0.02)
        assert {f.payload_bytes for f in calibrated.fragments} == {int(fit.value)}

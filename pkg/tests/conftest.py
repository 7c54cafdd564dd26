from pathlib import Path

import numpy as np
import pandas as pd
import pytest

from odap_sim.scenario import default_scenario, update_scenario
from odap_sim.scenario.patterns import DistributionPattern
from odap_sim.sweep.runner import SWEEP_COLUMNS


@pytest.fixture(scope="session")
def scenario():
    return default_scenario()


@pytest.fixture(scope="session")
def whole_fragment_scenario(scenario):
    return update_scenario(scenario, product={"transfer_mode": "whole_fragment"})


@pytest.fixture(scope="session")
def quiet_scenario(scenario):
    return update_scenario(scenario, topology={"jitter_sigma_s": 0.0})


@pytest.fixture
def temp_workspace(tmp_path):
    return tmp_path


def synthetic_sweep_frame(k=8, replicates=2, throughputs=(1_000_000.0,)):
    """Makespans 100 + 3*x1 + 2*x1*x2 plus small replicate noise."""
    rng = np.random.default_rng(7)
    rows = []
    for throughput in throughputs:
        for pattern_id in range(1 << k):
            pattern = DistributionPattern.from_id(pattern_id, k)
            x = [1.0 if bit else -1.0 for bit in pattern.bits]
            mean = 100 + 3 * x[0] + 2 * x[0] * x[1]
            for replicate in range(replicates):
                rows.append(
                    {
                        "pattern_id": pattern_id,
                        "pattern_bits": pattern.bit_string,
                        "throughput_bps": throughput,
                        "replicate": replicate,
                        "seed": 1000 + replicate,
                        "makespan_s": mean + rng.normal(0, 0.01),
                    }
                )
    return pd.DataFrame(rows, columns=SWEEP_COLUMNS)


@pytest.fixture
def synthetic_sweep_csv(temp_workspace) -> Path:
    path = temp_workspace / "sweep.csv"
    synthetic_sweep_frame().to_csv(path, index=False, lineterminator="\n")
    return path


def pytest_configure(config):
    import warnings

    warnings.filterwarnings("ignore", category=DeprecationWarning)
    warnings.filterwarnings("ignore", category=PendingDeprecationWarning)

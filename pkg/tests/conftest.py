import numpy as np
import pytest

from roadloc.config import Config
from roadloc.radiomap import build_radio_map
from roadloc.signal_model import SignalSequence
from roadloc.synth import channel_from_config, generate, layout_from_config

ACCEPTANCE_LINES = []


def pytest_configure(config):
    config.addinivalue_line("markers", "property: invariant / property-based suites")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)


@pytest.fixture
def record_criterion():
    def record(number, name, passed, detail=""):
        line = f"criterion {number} [{'PASS' if passed else 'FAIL'}] {name}" + (f": {detail}" if detail else "")
        ACCEPTANCE_LINES.append(line)
        print(line)

    return record


@pytest.fixture(scope="session")
def default_cfg():
    return Config()


@pytest.fixture(scope="session")
def clean_scenario(default_cfg):
    return generate(layout_from_config(default_cfg), channel_from_config(default_cfg, sigma=0.0))


@pytest.fixture(scope="session")
def clean_map(clean_scenario, default_cfg):
    return build_radio_map(clean_scenario, default_cfg)


def straight_sequence(rsrp, road_id="r", spacing=1.0):
    rsrp = np.asarray(rsrp, dtype=np.float64)
    if rsrp.ndim == 1:
        rsrp = rsrp[:, None]
    x = np.arange(rsrp.shape[0]) * spacing
    return SignalSequence(road_id, np.column_stack([x, np.zeros_like(x)]), rsrp)

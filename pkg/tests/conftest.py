import sys

import numpy as np
import pytest

from proforg.env import EnvConfig
from proforg.oracle import solve


@pytest.fixture(scope="session")
def env_cfg():
    return EnvConfig()


@pytest.fixture(scope="session")
def table(env_cfg):
    return solve(env_cfg)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    lines = getattr(module, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)

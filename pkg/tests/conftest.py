import numpy as np
import pytest

from twrelay import SystemConfig, build_problem, draw_channels

ACCEPTANCE_LINES = {}


def record_acceptance(number, passed, detail):
    ACCEPTANCE_LINES[number] = f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}"
    print(ACCEPTANCE_LINES[number])


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for key in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[key])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def make_instance(seed=0, **overrides):
    config = SystemConfig(**overrides)
    ch = draw_channels(config, seed)
    return config, ch, build_problem(config, ch)


@pytest.fixture
def instance3():
    return make_instance(3)

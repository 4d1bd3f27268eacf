import dataclasses

import numpy as np
import pytest

from scalespace import PRESETS, TimeSeries, generate_synthetic


def irregular_series(seed=5, n=40):
    rng = np.random.default_rng(seed)
    t = np.sort(rng.uniform(0, 500, n))
    t = t[np.concatenate([[True], np.diff(t) > 1e-3])]
    y = np.sin(t / 60.0) + 0.2 * rng.standard_normal(t.size)
    se = rng.uniform(0.1, 0.4, t.size)
    return TimeSeries(t, y, se, "irregular")


def corpus():
    """Small set of series used by the empirical property checks."""
    return [
        generate_synthetic(PRESETS["fig1-analogue"]),
        generate_synthetic(dataclasses.replace(PRESETS["flat"], seed=1)),
        generate_synthetic(PRESETS["trend"]),
        irregular_series(),
        TimeSeries([0.0, 1.0, 2.5, 4.0, 4.5, 7.0], [0.3, -0.1, 0.4, 0.9, 0.7, 1.5], None, "tiny"),
    ]


@pytest.fixture(scope="session")
def series_corpus():
    return corpus()


@pytest.fixture(scope="session")
def fig1_series():
    return generate_synthetic(PRESETS["fig1-analogue"])


ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance_record():
    """Call with (criterion, passed, detail); the line is printed in the summary."""
    def record(name, passed, detail=""):
        ACCEPTANCE_LINES.append(f"{'PASS' if passed else 'FAIL'}  {name}  {detail}".rstrip())
        return passed
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

"""Shared fixtures.

Every call to ``fit`` made in this process is recorded so that the
objective-trace monotonicity check can inspect all fits run by the suite.
That check is moved to the end of the run.
"""

import numpy as np
import pytest

import rkhsel
import rkhsel.cli
import rkhsel.solver
import rkhsel.tuning

TRACE_SLACK = 1e-10
RECORDED_TRACES = []
# acceptance criterion number -> (passed, detail)
ACCEPTANCE = {}

_original_fit = rkhsel.solver.fit


def _recording_fit(*args, **kwargs):
    model = _original_fit(*args, **kwargs)
    RECORDED_TRACES.append(list(model.trace))
    return model


for _mod in (rkhsel, rkhsel.solver, rkhsel.tuning, rkhsel.cli):
    _mod.fit = _recording_fit


def trace_violations():
    """Indices of recorded traces that increase by more than the slack."""
    bad = []
    for i, tr in enumerate(RECORDED_TRACES):
        d = np.diff(np.asarray(tr))
        if np.any(d > TRACE_SLACK):
            bad.append(i)
    return bad


def pytest_collection_modifyitems(session, config, items):
    last = [it for it in items if it.get_closest_marker("runs_last")]
    rest = [it for it in items if not it.get_closest_marker("runs_last")]
    items[:] = rest + last


def pytest_configure(config):
    config.addinivalue_line("markers", "runs_last: run after every other test")
    config.addinivalue_line("markers", "slow: long-running benchmark check")


def record_criterion(number: int, passed: bool, detail: str) -> None:
    """Store and print the outcome of one acceptance criterion."""
    ACCEPTANCE[number] = (bool(passed), detail)
    print(f"criterion {number}: {'PASS' if passed else 'FAIL'} {detail}")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        passed, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)

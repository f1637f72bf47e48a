import os
from collections import defaultdict

import numpy as np
import pytest

from gammalab import kernels

BACKENDS = ["python"] + (["cython"] if kernels._c is not None else [])

_criteria = defaultdict(list)


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")


def pytest_runtest_logreport(report):
    if not (report.when == "call" or (report.when == "setup" and report.outcome != "passed")):
        return
    n = dict(report.user_properties).get("criterion")
    if n is not None:
        _criteria[n].append(report.outcome == "passed")


def pytest_collection_modifyitems(items):
    for item in items:
        m = item.get_closest_marker("criterion")
        if m is not None:
            item.user_properties.append(("criterion", int(m.args[0])))


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_criteria):
        ok = all(_criteria[n])
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'} ({len(_criteria[n])} checks)")


@pytest.fixture(params=BACKENDS)
def backend(request, monkeypatch):
    """Route the kernel dispatch through one backend."""
    monkeypatch.setattr(kernels, "BACKEND", request.param)
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(autouse=True)
def _single_thread(monkeypatch):
    monkeypatch.setenv("GAMMALAB_THREADS", os.environ.get("GAMMALAB_TEST_THREADS", "1"))

import sys

import numpy as np
import pytest

from flowshift import _kernel
from flowshift.config import load_config
from flowshift.flow import IntegratorConfig

BACKENDS = ["python", "cython"]


@pytest.fixture(params=BACKENDS)
def backend(request, monkeypatch):
    """Run a test once per integration kernel."""
    if request.param == "cython":
        if _kernel.compiled_solve is None:
            pytest.skip("compiled kernel not built")
        monkeypatch.setattr(_kernel, "dopri_solve", _kernel.compiled_solve)
    else:
        monkeypatch.setattr(_kernel, "dopri_solve", _kernel.python_solve)
    return request.param


@pytest.fixture
def cfg():
    return IntegratorConfig()


@pytest.fixture(scope="session")
def shipped():
    return load_config()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)

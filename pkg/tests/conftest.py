import numpy as np
import pytest

from risbody.codes import dft_code_assignment
from risbody.setup import SystemSetup, build_model


@pytest.fixture(scope="session")
def setup():
    return SystemSetup()


@pytest.fixture(scope="session")
def codes():
    return dft_code_assignment(2, 16)


@pytest.fixture
def make_model(setup):
    def make(n_u=4, side=0.03, seed=0, regime="near", **overrides):
        from dataclasses import replace
        return build_model(replace(setup, **overrides) if overrides else setup, n_u, side, seed, regime)
    return make


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


_ACCEPTANCE = {}


@pytest.fixture(scope="session")
def acceptance_log():
    """Criterion number -> (passed, detail); printed after the run."""
    return _ACCEPTANCE


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        passed, detail = _ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if passed else 'FAIL'} - {detail}")

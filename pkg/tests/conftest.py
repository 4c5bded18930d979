import numpy as np
import pytest

from amdahl_learn.features import FeatureTerm, ModelSpec
from amdahl_learn.model_core import ResourceSchema, ResourceVector
from amdahl_learn.synthetic import default_truth, e1_ranges, generate, sample_configs

_ACCEPTANCE = []


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(name): exit criterion reported in the summary")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker and (rep.when == "call" or (rep.when == "setup" and rep.outcome != "passed")):
        _ACCEPTANCE.append((marker.args[0], rep.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome in _ACCEPTANCE:
        status = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"[{status}] {name}")


@pytest.fixture
def ab_schema():
    return ResourceSchema(("a", "b"))


@pytest.fixture
def e1():
    return e1_ranges()


@pytest.fixture
def truth():
    return default_truth()


@pytest.fixture
def noiseless_e1(truth, e1):
    configs = sample_configs(e1, 58, seed=7)
    return generate(truth, configs)


def vec(schema, *values):
    return ResourceVector(schema, values)

import numpy as np
import pytest
from hypothesis import settings

from boostdepth.synth import SceneSpec, render

settings.register_profile("default", deadline=None)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def step_scene():
    return render(SceneSpec(layout="two_plane_step"))


@pytest.fixture(scope="session")
def small_step_scene():
    return render(SceneSpec(layout="two_plane_step", width=64, height=48, frames=7))


@pytest.fixture(scope="session")
def plane_scene():
    return render(SceneSpec(layout="textured_plane"))


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title): end-to-end acceptance criterion")
    config._acceptance = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("acceptance")
    if mark is None or not (report.when == "call" or report.failed):
        return
    number, title = mark.args
    _, ok, details = item.config._acceptance.get(number, (title, True, []))
    details = details + [str(v) for k, v in report.user_properties if k == "detail"]
    item.config._acceptance[number] = (title, ok and not report.failed, details)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    results = getattr(config, "_acceptance", {})
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        title, ok, details = results[number]
        extra = f" ({'; '.join(details)})" if details else ""
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {title}{extra}")

import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

DATA = Path(__file__).parent / "data"

_criteria = {}


@pytest.fixture(scope="session")
def camera():
    from stemnoise import load_image

    return load_image(DATA / "camera.png")


@pytest.fixture
def rng():
    return np.random.default_rng(20240517)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    number, title = marker.args
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        status = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}[report.outcome]
        prev = _criteria.get(number, (title, "PASS"))[1]
        # a criterion fails if any of its tests fails
        if prev == "FAIL" or status == "FAIL":
            status = "FAIL"
        elif prev == "SKIP":
            status = "SKIP"
        _criteria[number] = (title, status)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        title, status = _criteria[number]
        terminalreporter.write_line(f"criterion {number:>2}: {status}  {title}")

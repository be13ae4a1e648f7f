import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from verdant.approxmul import SearchParams, build_exact_multiplier, pareto_search  # noqa: E402
from verdant.config import load_config  # noqa: E402

# regression-pinned multiplier search run
PINNED_SEARCH = SearchParams(population=64, generations=50, seed=1)


@pytest.fixture(scope="session")
def exact8():
    return build_exact_multiplier(8)


@pytest.fixture(scope="session")
def pinned_front(exact8):
    return pareto_search(exact8, PINNED_SEARCH)


@pytest.fixture(scope="session")
def config():
    return load_config()


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        number, title = marker.args
        detail = dict(item.user_properties).get("detail", "")
        if report.outcome != "passed":
            msg = str(report.longrepr).strip().splitlines()
            detail = msg[-1] if msg else detail
        item.config._criteria = getattr(item.config, "_criteria", {})
        item.config._criteria[number] = (title, report.outcome == "passed", detail)


def pytest_terminal_summary(terminalreporter, config):
    results = getattr(config, "_criteria", {})
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        title, ok, detail = results[number]
        terminalreporter.write_line(f"criterion {number} {title}: {'PASS' if ok else 'FAIL'}  {detail}")

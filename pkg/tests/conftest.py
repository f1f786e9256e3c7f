from __future__ import annotations

from collections import defaultdict

import pytest

from gazeprompt.synth import make_test_image
from gazeprompt.types import Fixation, ScanPath


def pytest_configure(config):
    config.addinivalue_line(
        "markers",
        "acceptance(criterion, title): marks a test as part of one numbered acceptance criterion",
    )


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is not None:
        report._acceptance_marker = (marker.kwargs["criterion"], marker.kwargs["title"])


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One pass/fail line per acceptance criterion at the end of the run."""
    results = defaultdict(lambda: {"passed": 0, "failed": 0, "xfailed": 0})
    titles = {}
    categories = {"passed": "passed", "failed": "failed", "error": "failed", "xfailed": "xfailed"}
    for category, bucket in categories.items():
        for report in terminalreporter.stats.get(category, []):
            marker = getattr(report, "_acceptance_marker", None)
            if marker is None:
                continue
            criterion, title = marker
            results[criterion][bucket] += 1
            titles[criterion] = title
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for criterion in sorted(results):
        counts = results[criterion]
        status = "FAIL" if counts["failed"] else "PASS"
        note = ""
        if counts["xfailed"]:
            note = (
                f" ({counts['xfailed']} known-inconsistent reference value(s) "
                "asserted as expected failures)"
            )
        terminalreporter.write_line(f"criterion {criterion:>2} [{status}] {titles[criterion]}{note}")


def scanpath_from_durations(
    durations: list[float],
    image_id: str = "img",
    reader_id: str = "r1",
    x: float = 10.0,
    y: float = 10.0,
    step: float = 3.0,
) -> ScanPath:
    """Scanpath with the given durations and distinct, deterministic positions."""
    fixations = tuple(
        Fixation(x=x + i * step, y=y + i * step, duration=d, seq=i + 1)
        for i, d in enumerate(durations)
    )
    return ScanPath(image_id=image_id, reader_id=reader_id, fixations=fixations)


@pytest.fixture
def small_image(tmp_path):
    return make_test_image(str(tmp_path / "img.png"), width=64, height=64, seed=3)


@pytest.fixture
def square_image(tmp_path):
    return make_test_image(str(tmp_path / "img.png"), width=512, height=512, seed=7)

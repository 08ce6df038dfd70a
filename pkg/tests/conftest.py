import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from trapped_wave import ScattererSpec, find_resonances  # noqa: E402


@pytest.fixture(scope="session")
def ball():
    return ScattererSpec.penetrable(radius=1.0, contrast=0.5, alpha=1.0)


@pytest.fixture(scope="session")
def catalog40(ball):
    """Complete catalog of the c = 1/2 ball below k = 40 (about a minute)."""
    return find_resonances(ball, 40.0, strip_depth=3.0)


@pytest.fixture(scope="session")
def small_catalog(ball):
    return find_resonances(ball, 12.0, strip_depth=1.0, ell_max=14)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in range(1, 13):
        terminalreporter.write_line(results.get(n, f"criterion {n:2d}: NOT RUN"))

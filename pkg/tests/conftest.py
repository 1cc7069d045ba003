import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from ftrecon.catalog import catalog_finite_ft  # noqa: E402


@pytest.fixture(scope="session")
def catalog():
    """Catalog members keyed by domain size."""
    return {n: catalog_finite_ft(n) for n in (3, 4, 5)}


def pytest_terminal_summary(terminalreporter):
    from acceptance_log import LINES

    if LINES:
        terminalreporter.section("acceptance criteria")
        for line in LINES:
            terminalreporter.write_line(line)

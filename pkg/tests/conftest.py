import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from tmes import TimeSeriesPair

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

# filled by tests/test_acceptance.py, printed once per session
ACCEPTANCE_LINES: dict[str, str] = {}


@pytest.fixture
def ladder():
    """x = y = 1..10, the hand-checkable fixture."""
    v = np.arange(1.0, 11.0)
    return TimeSeriesPair(v, v.copy())


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES, key=lambda k: int(k)):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])

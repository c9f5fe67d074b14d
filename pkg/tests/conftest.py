import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from cstar_powernorms import AlgebraDescriptor
from strategies import REFERENCE_DESCRIPTORS

settings.register_profile(
    "default", deadline=None, max_examples=40,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(params=REFERENCE_DESCRIPTORS, ids=lambda d: "x".join(map(str, d)))
def desc(request):
    return AlgebraDescriptor(request.param)


_CRITERIA: dict = {}


@pytest.fixture
def criterion():
    """Record one acceptance verdict; a summary line per criterion is printed at the end."""
    def record(number: int, title: str, passed: bool, detail: str = ""):
        _CRITERIA[number] = (title, passed, detail)
        line = f"criterion {number:2d} {'PASS' if passed else 'FAIL'}: {title}"
        print(line + (f" ({detail})" if detail else ""))
        return passed
    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        title, passed, detail = _CRITERIA[number]
        line = f"criterion {number:2d} {'PASS' if passed else 'FAIL'}: {title}"
        terminalreporter.write_line(line + (f" ({detail})" if detail else ""))

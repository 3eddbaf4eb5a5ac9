import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", max_examples=50, deadline=None)
settings.load_profile("default")

ACCEPTANCE: dict[int, str] = {}


def record_criterion(number: int, passed: bool, detail: str):
    ACCEPTANCE[number] = f"criterion {number}: {'PASS' if passed else 'FAIL'} - {detail}"


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[number])


@pytest.fixture
def rng():
    return np.random.default_rng(1234)

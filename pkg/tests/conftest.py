import os
import sys

import pytest
from hypothesis import settings

sys.path.insert(0, os.path.dirname(__file__))

# first calls pay numba compilation; wall-clock deadlines would be flaky
settings.register_profile("digitlaw", deadline=None)
settings.load_profile("digitlaw")

_CRITERIA = []


def record_criterion(ident, text, status, detail=""):
    """``status`` is "PASS", "FAIL" or "SKIP"."""
    _CRITERIA.append((ident, text, status, detail))


@pytest.fixture
def criterion(request):
    """Context manager recording one acceptance criterion as PASS/FAIL."""
    class _Crit:
        def __init__(self, ident, text):
            self.ident, self.text, self.detail = ident, text, ""

        def __enter__(self):
            return self

        def __exit__(self, exc_type, exc, tb):
            if exc_type is None:
                status = "PASS"
            elif issubclass(exc_type, pytest.skip.Exception):
                status = "SKIP"
            else:
                status = "FAIL"
            record_criterion(self.ident, self.text, status, self.detail)
            return False

    return _Crit


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for ident, text, status, detail in sorted(_CRITERIA, key=lambda c: c[0]):
        line = f"[{status}] AC{ident:<3} {text}"
        if detail:
            line += f"  ({detail})"
        terminalreporter.write_line(line)

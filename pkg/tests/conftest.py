import pytest

from atomdiode.config import load_preset

_ACCEPTANCE = {}


@pytest.fixture
def acceptance():
    """Record a criterion outcome; the summary is printed at the end of the run."""

    def record(number, ok, detail=""):
        _ACCEPTANCE[number] = (bool(ok), detail)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        ok, detail = _ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture(scope="session")
def presets():
    cache = {}

    def get(name):
        if name not in cache:
            cache[name] = load_preset(name).scheme()
        return cache[name]

    return get

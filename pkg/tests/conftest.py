import pytest
from hypothesis import HealthCheck, settings

from emcone.eulermaclaurin import catalog

settings.register_profile("emcone", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("emcone")

CATALOG = catalog()
POINTED = [e for e in CATALOG if e.cone.is_pointed]
NON_POINTED = [e for e in CATALOG if not e.cone.is_pointed]

_RESULTS: list = []


@pytest.fixture
def criterion():
    """Record a PASS/FAIL line for an acceptance criterion, then assert it."""

    def report(number: int, title: str, ok: bool, detail: str = ""):
        line = f"{'PASS' if ok else 'FAIL'}  criterion {number:>2}: {title}"
        if detail:
            line += f"  [{detail}]"
        _RESULTS.append((number, line))
        print(line)
        assert ok, line

    return report


def pytest_terminal_summary(terminalreporter):
    if _RESULTS:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(_RESULTS):
            terminalreporter.write_line(line)

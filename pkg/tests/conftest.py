import pytest

import cvmdi.gaussian

_ACCEPTANCE_LINES = []


@pytest.fixture(autouse=True)
def _cross_check_spectra(monkeypatch):
    # Every closed-form symplectic spectrum is verified against |eig(i Omega cov)| under test.
    monkeypatch.setattr(cvmdi.gaussian, "CROSS_CHECK", True)


@pytest.fixture
def acceptance_report():
    """Record one summary line per acceptance criterion."""

    def report(number, title, passed, detail=""):
        line = f"criterion {number}: {'PASS' if passed else 'FAIL'}  {title}"
        if detail:
            line += f"  [{detail}]"
        _ACCEPTANCE_LINES.append(line)
        print(line)

    return report


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE_LINES):
            terminalreporter.write_line(line)

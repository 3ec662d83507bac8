import math

import pytest

THETA_3DB = 10 ** 0.3
# beta(10^0.3, 3): composite Simpson (2e5 panels) after the substitution
# x = L u^-4 that makes the integrand smooth on [0, 1]; agrees with a
# 40-digit mpmath evaluation to 1e-15.
BETA_3DB_ALPHA3 = 2.9870725910835842


@pytest.fixture
def beta_3db():
    return BETA_3DB_ALPHA3


def beta_alpha4(theta):
    return math.sqrt(theta) * (math.pi / 2 - math.atan(theta ** -0.5))


_ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def criterion_report():
    """Record one PASS/FAIL line per acceptance criterion; printed at session end."""
    def record(name: str, ok: bool, detail: str) -> bool:
        _ACCEPTANCE_LINES.append(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
        print(_ACCEPTANCE_LINES[-1])
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

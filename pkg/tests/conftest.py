import hypothesis
import pytest

from discrete_merton import Discretization, MarketParams, merton_strategy

hypothesis.settings.register_profile("default", max_examples=60, deadline=None)
hypothesis.settings.load_profile("default")

ACCEPTANCE_LINES: list[str] = []

A, B, ALPHA, T, X0 = 0.07, 0.2, 0.5, 1.0, 1.0


@pytest.fixture
def table1_market():
    """Factory for the constant-coefficient market used by the reference experiment grid."""

    def make(N: int):
        disc = Discretization(T, N)
        params = MarketParams.constant(A, B, N)
        return params, merton_strategy(params, ALPHA, disc), disc

    return make


@pytest.fixture
def record_criterion():
    def record(number: int, ok: bool, detail: str) -> None:
        ACCEPTANCE_LINES.append(f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {detail}")

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

import numpy as np
import pytest
from functools import reduce

SINGLE = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]]),
    "Z": np.diag([1.0 + 0j, -1.0]),
}


def kron_label(label: str) -> np.ndarray:
    """Reference Pauli matrix built letter by letter, qubit 1 leftmost."""
    return reduce(np.kron, [SINGLE[c] for c in label], np.eye(1, dtype=complex))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


_acceptance: list[tuple[str, str]] = []
_details: dict[str, str] = {}


@pytest.fixture
def detail(request):
    """Attach a one-line measurement summary to the acceptance report."""

    def note(text: str) -> None:
        _details[request.node.name] = text

    return note


def pytest_runtest_logreport(report):
    if "test_acceptance.py" in report.nodeid and report.when == "call":
        name = report.nodeid.split("::")[-1]
        outcome = "PASS" if report.passed else "FAIL"
        _acceptance.append((name, outcome))
        print(f"\n{outcome} {name}")


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome in _acceptance:
        extra = _details.get(name, "")
        terminalreporter.write_line(f"{outcome}  {name}  {extra}".rstrip())

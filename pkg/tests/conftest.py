import pytest

from coopsdmm.field import PrimeField, SeededPrg


@pytest.fixture
def F7():
    return PrimeField(7)


@pytest.fixture
def F5():
    return PrimeField(5)


@pytest.fixture
def prg():
    return SeededPrg(20211221)


_acceptance: dict[str, str] = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py::" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    if report.failed:
        _acceptance[name] = "FAIL"
    elif report.when == "call" and name not in _acceptance:
        _acceptance[name] = "PASS"


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    from test_acceptance import CRITERIA

    terminalreporter.section("acceptance criteria")
    for name, label in CRITERIA.items():
        if name in _acceptance:
            terminalreporter.write_line(f"{_acceptance[name]}  criterion {label}")

import random
from pathlib import Path

import pytest

from invscov.ir.parser import load_program, parse_program

DATA = Path(__file__).parent / "data"


@pytest.fixture
def max_program():
    return load_program(DATA / "max.ir")


@pytest.fixture
def sum_program():
    return load_program(DATA / "sum.ir")


@pytest.fixture
def rng():
    return random.Random(1234)


def program(text: str):
    """Parse IR text with an implicit header."""
    if not text.lstrip().startswith("program"):
        text = "program entry=@main seed=3\n" + text
    return parse_program(text)


# One PASS/FAIL line per acceptance criterion, printed after the run.
_VERDICTS: dict[str, tuple] = {}


@pytest.fixture
def verdict(record_property):
    """Attach a one-line measurement to the acceptance summary."""

    def note(text: str) -> None:
        record_property("verdict", text)

    return note


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    if report.when == "call" or (report.when == "setup" and not report.passed):
        detail = dict(report.user_properties).get("verdict", "")
        name = report.nodeid.split("::")[-1]
        _VERDICTS[name] = ("PASS" if report.passed else "FAIL", detail)


def pytest_terminal_summary(terminalreporter):
    if not _VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, (status, detail) in _VERDICTS.items():
        terminalreporter.write_line(f"{status} {name}" + (f": {detail}" if detail else ""))

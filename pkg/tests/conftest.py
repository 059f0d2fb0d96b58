import sys
from fractions import Fraction
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from groupfair.model import parse_allocation, parse_instance, parse_lottery  # noqa: E402

FIXTURES = Path(__file__).parent / "fixtures"


def load(name):
    return (FIXTURES / name).read_text()


@pytest.fixture(scope="session")
def ex1():
    return parse_instance(load("example1.json"))


@pytest.fixture(scope="session")
def ex3():
    return parse_instance(load("example3.json"))


@pytest.fixture(scope="session")
def pistar(ex1):
    return parse_allocation(load("pistar.json"), ex1)


@pytest.fixture(scope="session")
def pi1(ex3):
    return parse_allocation(load("pi1.json"), ex3)


@pytest.fixture(scope="session")
def pibad(ex3):
    return parse_allocation(load("bad.json"), ex3)


@pytest.fixture(scope="session")
def ex4_quarter(ex3):
    return parse_lottery(load("example4_lottery.json"), ex3)


@pytest.fixture(scope="session")
def suite_instances():
    """The three-agent worked instance plus the 100 seeded instances used by the verify suite."""
    from groupfair.verify import verify_instances

    return verify_instances(0, 100, 3, 4)


HALF = Fraction(1, 2)


def pytest_terminal_summary(terminalreporter):
    rows = []
    for status in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(status, []):
            name = rep.nodeid.rsplit("::", 1)[-1]
            if "test_acceptance.py" in rep.nodeid and name.startswith("test_criterion_") and rep.when == "call":
                rows.append((name, "PASS" if status == "passed" else "FAIL"))
    if not rows:
        return
    terminalreporter.section("acceptance criteria")
    for name, verdict in sorted(rows):
        number = int(name.split("_")[2])
        label = name.split("_", 3)[3].replace("_", " ")
        terminalreporter.write_line(f"criterion {number:2d} [{verdict}] {label}")

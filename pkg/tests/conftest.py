import pytest

from grpext import oracle
from grpext.pcgroup import PcPresentation

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def make_s4():
    # S4 > A4 > V4 > 1
    return PcPresentation.from_relations(
        [2, 3, 2, 2], {}, {(1, 0): {1: 2}, (3, 0): {2: 1, 3: 1}, (2, 1): {3: 1}, (3, 1): {2: 1, 3: 1}}
    )


def make_d8():
    return PcPresentation.from_relations([2, 2, 2], {}, {(1, 0): {1: 1, 2: 1}})


def make_q8():
    return PcPresentation.from_relations([2, 2, 2], {0: {2: 1}, 1: {2: 1}}, {(1, 0): {1: 1, 2: 1}})


def make_s3():
    return PcPresentation.from_relations([2, 3], {}, {(1, 0): {1: 2}})


@pytest.fixture
def s4():
    return make_s4()


@pytest.fixture
def d8():
    return make_d8()


@pytest.fixture
def q8():
    return make_q8()


@pytest.fixture
def s3():
    return make_s3()


@pytest.fixture
def c22():
    return PcPresentation.from_relations([2, 2], {}, {})


@pytest.fixture(scope="session")
def small_groups():
    return oracle.small_pc_groups(16)

import pytest

from legalassign import ConsentSet, fixture_path, parse_instance


def load(name: str):
    return parse_instance(fixture_path(name).read_text())


@pytest.fixture(scope="session")
def ex1():
    return load("ex1.inst")


@pytest.fixture(scope="session")
def ex2():
    return load("ex2.inst")


@pytest.fixture(scope="session")
def ex3():
    return load("ex3.inst")


@pytest.fixture(scope="session")
def ex4():
    return load("ex4.inst")


@pytest.fixture(scope="session")
def ex5():
    return load("ex5.inst")


@pytest.fixture(scope="session")
def ex9():
    return load("ex9.inst")


@pytest.fixture(scope="session")
def consent5():
    """Everyone in the 4x4 market consents except a3."""
    return ConsentSet.of(fixture_path("ex5-consent.txt").read_text().split())


@pytest.fixture(scope="session")
def consent8():
    """Everyone in the 5x5 market consents except a5."""
    return ConsentSet.of(fixture_path("ex8-consent.txt").read_text().split())

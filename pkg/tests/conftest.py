import pytest

from mcd.identity import Identity
from mcd.suites import TransparentSuite, get_suite


@pytest.fixture(scope="session")
def suite101():
    return TransparentSuite(101)


@pytest.fixture(scope="session")
def tsuite():
    return TransparentSuite()


@pytest.fixture(scope="session")
def prod_suite():
    return get_suite("production_pairing")


@pytest.fixture(scope="session")
def ids30():
    return [Identity(f"+3161000{i:04d}") for i in range(30)]

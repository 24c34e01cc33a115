import pytest

from cobarcyl.cooperads import (
    builtin_binary_trivial,
    builtin_coass,
    builtin_cocom,
    builtin_mixed_degree,
    builtin_two_level,
)
from cobarcyl.cylinder import CylContext


@pytest.fixture(scope="session")
def cocom3():
    return CylContext(builtin_cocom(3))


@pytest.fixture(scope="session")
def cocom4():
    return CylContext(builtin_cocom(4))


@pytest.fixture(scope="session")
def coass3():
    return CylContext(builtin_coass(3))


@pytest.fixture(scope="session")
def two_level():
    return CylContext(builtin_two_level())


@pytest.fixture(scope="session")
def binary_trivial():
    return CylContext(builtin_binary_trivial())


@pytest.fixture(scope="session")
def mixed_degree():
    return CylContext(builtin_mixed_degree())

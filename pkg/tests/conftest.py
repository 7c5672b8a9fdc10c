import pytest

from gaugeproj import build_from_gauge, power


@pytest.fixture(scope="session")
def h05_depth5():
    return build_from_gauge(power(0.5), 5)


@pytest.fixture(scope="session")
def h03_depth5():
    return build_from_gauge(power(0.3), 5)


@pytest.fixture(scope="session")
def h08_depth5():
    return build_from_gauge(power(0.8), 5)

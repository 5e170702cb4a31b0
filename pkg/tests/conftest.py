import pytest

from dyninfer import example_section33, example_stock


@pytest.fixture
def section33():
    return example_section33(6)


@pytest.fixture
def stock():
    return example_stock(6)

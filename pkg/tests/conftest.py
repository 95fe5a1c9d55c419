import pytest

from hyperqss.photonics import make_rng


@pytest.fixture
def rng():
    return make_rng(12345)

import pytest

from szzset.synthetic import make_benchmark, two_origin_demo


@pytest.fixture(scope="session")
def demo():
    return two_origin_demo()


@pytest.fixture(scope="session")
def benchmark():
    return make_benchmark(seed=7, n_links=20)

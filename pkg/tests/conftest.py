import math

import pytest

from homsum import kernels


@pytest.fixture
def p2():
    return kernels.single_pair()


@pytest.fixture
def c3():
    return kernels.constant_kernel(3)


@pytest.fixture
def d4():
    return kernels.disjoint_pairs(4)


@pytest.fixture
def w25():
    return kernels.walsh_kernel(2, 5)


def random_kernels(rng, count, d_range=(1, 4), n_max=8, sigma2=None):
    """Seeded stream of random sparse kernels for the property suites."""
    out = []
    for _ in range(count):
        d = int(rng.integers(d_range[0], d_range[1] + 1))
        n = int(rng.integers(d, n_max + 1))
        total = math.comb(n, d)
        s2 = sigma2 if sigma2 is not None else float(rng.uniform(0.25, 4.0))
        out.append(
            kernels.random_sparse_kernel(
                d,
                n,
                seed=int(rng.integers(0, 2**31)),
                entry_count=int(rng.integers(1, total + 1)),
                sigma2=s2,
            )
        )
    return out

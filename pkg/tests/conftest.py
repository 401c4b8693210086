import numpy as np
import pytest

from qergo import computational_basis, haar_random_basis, make_basis

SQRT_HALF = 1.0 / np.sqrt(2.0)


@pytest.fixture(scope="session")
def z2():
    return computational_basis(2)


@pytest.fixture(scope="session")
def x2():
    return make_basis(
        np.array([[1, 1], [1, -1]]) * SQRT_HALF, labels=["+", "-"]
    )


@pytest.fixture(scope="session")
def y2():
    return make_basis(
        np.array([[1, 1], [1j, -1j]]) * SQRT_HALF, labels=["+i", "-i"]
    )


def haar_triple(dim: int, seed: int):
    return (
        haar_random_basis(dim, 3 * seed),
        haar_random_basis(dim, 3 * seed + 1),
        haar_random_basis(dim, 3 * seed + 2),
    )

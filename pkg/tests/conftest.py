import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from fractions import Fraction as F  # noqa: E402

import pytest  # noqa: E402

from plapprox import fixtures  # noqa: E402


@pytest.fixture(scope="session")
def square_l():
    return fixtures.square_diagonal_complex()


@pytest.fixture(scope="session")
def std2():
    return fixtures.standard_simplex_complex(2)


@pytest.fixture(scope="session")
def small_square():
    return fixtures.square_diagonal_complex(scale=F(1, 18))


@pytest.fixture(scope="session")
def triangle_fixture():
    return fixtures.triangle_to_square_map()


@pytest.fixture(scope="session")
def fold():
    return fixtures.fold_map()

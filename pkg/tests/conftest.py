import pytest

from normlab.dsl import SymbolContext, parse_symbol
from normlab.phase import PhaseGrid, SpatialGrid, reference_grids


@pytest.fixture(scope="session")
def ref1():
    return reference_grids(1)


@pytest.fixture(scope="session")
def small_grid():
    # fine enough for Gaussian-corpus checks, small enough for dense SVDs
    return SpatialGrid.uniform(1, 10.0, 128)


@pytest.fixture(scope="session")
def small_phase():
    return PhaseGrid.uniform(1, 8.0, 96)


@pytest.fixture
def sym():
    def make(text, n=1):
        return parse_symbol(text, SymbolContext(n))

    return make

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

import becomp as bc


@pytest.fixture(scope="session")
def euclid3():
    return bc.ModelManifold(3, bc.EuclideanWarp(), bc.ConstantDensity(1.0))


@pytest.fixture(scope="session")
def cone_const():
    return bc.ModelManifold(3, bc.SmoothedConeWarp(0.6, 1.0), bc.ConstantDensity(1.0))


@pytest.fixture(scope="session")
def cone_logpoly():
    """Cone warp with a matching-exponent density: positive volume ratio."""
    return bc.ModelManifold(3, bc.SmoothedConeWarp(0.6, 1.0),
                            bc.LogPolyDensity(beta=1.0, r_w=1.0))


@pytest.fixture(scope="session")
def cone_logpoly_envelope(cone_logpoly):
    return bc.required_envelope(cone_logpoly, alpha=1.0, r_max=1000.0)

import sys
from pathlib import Path

import numpy as np
import pytest

# modules are imported as core.* / shared.*, from the project root
sys.path.insert(0, str(Path(__file__).resolve().parents[1]))

from core.functions import build_function_spec  # noqa: E402
from shared.models import DEFAULT_TOLERANCES  # noqa: E402

EXAMPLE_F = "1/((1-x^2)*(1-y^2))"
SQUARE = "x^2 - 1; y^2 - 1"
UNIT_BOX = "-1:1,-1:1"


@pytest.fixture
def tol():
    return DEFAULT_TOLERANCES


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def example_spec():
    """Product barrier on the open square: strictly convex epigraph."""
    return build_function_spec(EXAMPLE_F, 2, [SQUARE], UNIT_BOX)


@pytest.fixture(scope="session")
def disc_spec():
    """x^2 + y^2 on the open unit disc: bounded at the boundary."""
    return build_function_spec("x^2 + y^2", 2, ["x^2 + y^2 - 1"], UNIT_BOX)


@pytest.fixture(scope="session")
def parabola_spec():
    return build_function_spec("x^2", 1, [], "-10:10")


@pytest.fixture(scope="session")
def affine_spec():
    return build_function_spec("x", 1, [], "-2:2")


@pytest.fixture(scope="session")
def annulus_spec():
    return build_function_spec("x^2 + y^2", 2, ["0.25 - x^2 - y^2; x^2 + y^2 - 1"], UNIT_BOX)

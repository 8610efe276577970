import math

import pytest

from swarmform.frames import I_REF_DEFAULT, R_REF_DEFAULT, build_context
from swarmform.targets import make_plane


@pytest.fixture(scope="session")
def ctx():
    """Case-study orbit: 500 km altitude, 51.7 deg inclination."""
    return build_context(R_REF_DEFAULT, I_REF_DEFAULT)


@pytest.fixture(scope="session")
def ctx_cw():
    """Clohessy-Wiltshire limit of the same orbit (J2 disabled)."""
    return build_context(R_REF_DEFAULT, I_REF_DEFAULT, k_j2=0.0)


@pytest.fixture(scope="session")
def plane30(ctx):
    """Reference swarm plane: 30 deg tilt, no in-plane rotation."""
    return make_plane(math.radians(30.0), 0.0, 0.5, ctx)


@pytest.fixture(scope="session")
def plane4050(ctx):
    return make_plane(math.radians(40.0), math.radians(50.0), 0.5, ctx)

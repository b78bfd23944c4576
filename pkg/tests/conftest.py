import pytest

from bubblelab.core.grid import RadialGrid
from bubblelab.core.modulation.models import ModState
from bubblelab.core.profiles.profile_set import build_profile_set


@pytest.fixture(scope="session")
def k() -> int:
    return 4


@pytest.fixture(scope="session")
def grid() -> RadialGrid:
    return RadialGrid(1e-6, 1e3, 4096)


@pytest.fixture(scope="session")
def coarse_grid() -> RadialGrid:
    return RadialGrid(1e-3, 1e3, 1024)


@pytest.fixture(scope="session")
def profiles(k):
    return build_profile_set(k)


@pytest.fixture
def state() -> ModState:
    """Two well separated bubbles with velocities of the natural size nu^(k/2)."""
    nu = 0.05
    return ModState(t=20.0, mu=1.0, lam=nu, a=0.4 * nu**2, b=0.8 * nu**2)


@pytest.fixture
def no_presets(tmp_path):
    """A presets path that does not exist, so only model defaults apply."""
    return tmp_path / "missing.toml"

import numpy as np
import pytest
from typer.testing import CliRunner

from mzkit.core.config import settings
from mzkit.core.logging import configure_logging
from mzkit.models.family import FamilyLevel, PointFamily
from mzkit.models.measure import Measure
from mzkit.repositories.family import FamilyRepository
from mzkit.services.generators import gauss_level
from mzkit.services.polyspace import orthonormal_basis


@pytest.fixture(autouse=True)
def quiet_logging():
    """Keep test output readable."""
    configure_logging("WARNING")
    yield


@pytest.fixture
def override_settings(monkeypatch):
    """Patch attributes of the shared settings object for one test."""

    def _override(**values):
        for key, value in values.items():
            monkeypatch.setattr(settings, key, value)

    return _override


@pytest.fixture(scope="session")
def ball_1d() -> Measure:
    return Measure.ball(1, 0.5)


@pytest.fixture(scope="session")
def chebyshev_1d() -> Measure:
    return Measure.ball(1, 0.0)


@pytest.fixture(scope="session")
def ball_2d() -> Measure:
    return Measure.ball(2, 0.5)


@pytest.fixture(scope="session")
def box_2d() -> Measure:
    return Measure.box(((-1.0, 1.0), (0.0, 2.0)))


@pytest.fixture(scope="session")
def ellipse_2d() -> Measure:
    return Measure.ellipsoid((2.0, 0.5))


@pytest.fixture(scope="session")
def space_1d(ball_1d):
    """Degree-20 space of the segment with Lebesgue weight (a = 1/2)."""
    return orthonormal_basis(ball_1d, 20)


@pytest.fixture(scope="session")
def space_2d(ball_2d):
    return orthonormal_basis(ball_2d, 8)


@pytest.fixture(scope="session")
def gauss_family() -> PointFamily:
    """Gauss families k = 5, 10, 20 for a = 1/2."""
    return PointFamily(n=1, families=[FamilyLevel(k=k, points=gauss_level(k, 0.5)) for k in (5, 10, 20)])


@pytest.fixture
def family_file(tmp_path, gauss_family):
    path = tmp_path / "family.json"
    FamilyRepository().write(path, gauss_family)
    return path


@pytest.fixture
def runner() -> CliRunner:
    return CliRunner()


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(7)

import numpy as np
import pytest

from attsafe.dynamics import PlantModel, SpacecraftState, table1_model
from attsafe.mathcore import euler321_to_mrp

TABLE1_EULER_DEG = np.array([140.0, 20.0, 100.0])


@pytest.fixture(scope="session")
def model() -> PlantModel:
    return table1_model()


@pytest.fixture(scope="session")
def sigma0() -> np.ndarray:
    return euler321_to_mrp(np.radians(TABLE1_EULER_DEG))


@pytest.fixture(scope="session")
def x0(sigma0) -> SpacecraftState:
    return SpacecraftState.rest(sigma0)


@pytest.fixture()
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)

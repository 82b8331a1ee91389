import numpy as np
import pytest

from expbands.model import CensoringScheme, LocScale, MleEstimate, ProgressiveSample, load_insulating_fluid, mle


@pytest.fixture(scope="session")
def fluid_sample() -> ProgressiveSample:
    return load_insulating_fluid()


@pytest.fixture(scope="session")
def fluid_est(fluid_sample) -> MleEstimate:
    return mle(fluid_sample)


@pytest.fixture(scope="session")
def fluid_scheme(fluid_sample) -> CensoringScheme:
    return fluid_sample.scheme


@pytest.fixture()
def rng() -> np.random.Generator:
    return np.random.Generator(np.random.Philox(424242))


@pytest.fixture(scope="session")
def std_theta() -> LocScale:
    return LocScale(0.0, 1.0)

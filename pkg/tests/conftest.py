import numpy as np
import pytest

from noisebeam.config import RunConfig
from noisebeam.harness import build_world
from noisebeam.schedule import make_schedule
from noisebeam.toyworld import GaussianDenoiser, MixtureDenoiser, make_denoiser


@pytest.fixture(scope="session")
def schedule():
    return make_schedule(400, 16)


@pytest.fixture(scope="session")
def small_schedule():
    return make_schedule(40, 8)


@pytest.fixture(scope="session")
def gaussian_model():
    rng = np.random.default_rng(7)
    return GaussianDenoiser(mean=rng.normal(size=(3, 8, 8)), prior_std=0.7)


@pytest.fixture(scope="session")
def fifo_world():
    # the default world: 16-frame clips, 512-clip branching corpus
    cfg = RunConfig()
    return cfg, build_world(cfg)


@pytest.fixture(scope="session")
def tiny_mixture(small_schedule):
    """A 6-clip corpus of 2-frame 4x4 clips, small enough for longdouble sums."""
    rng = np.random.default_rng(3)
    corpus = rng.normal(size=(6, 2, 4, 4))
    return MixtureDenoiser(corpus)


@pytest.fixture(scope="session")
def counting_gaussian(gaussian_model, small_schedule):
    def fresh():
        return make_denoiser(gaussian_model, small_schedule)

    return fresh

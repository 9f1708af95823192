import numpy as np
import pytest

from lqrlab import EncoderConfig, encode_spectral, train_codebooks, voiced_clip


@pytest.fixture(scope="session")
def small_cfg():
    return EncoderConfig(frame_len=256, hop=128, n_bands=8)


@pytest.fixture(scope="session")
def short_clip():
    return voiced_clip(3, duration=1.0)


@pytest.fixture(scope="session")
def small_model(small_cfg, short_clip):
    # 3 stages x 8 codewords is enough structure for the metric tests
    latents = [
        encode_spectral(voiced_clip(seed, duration=1.0), small_cfg)
        for seed in (3, 4)
    ]
    return train_codebooks(latents, n_stages=3, n_codewords=8, seed=5)


@pytest.fixture()
def philox():
    def make(seed):
        return np.random.Generator(np.random.Philox(seed))

    return make

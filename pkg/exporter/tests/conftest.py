import numpy as np
import pytest
from scipy.io import wavfile


@pytest.fixture(scope="session")
def tiny_checkpoint(tmp_path_factory):
    """Randomly initialized small codec saved as a loadable checkpoint.

    16 kHz, hop 64, 32-dim latents, 4 quantizer layers inside the 4 kbps
    budget. Small enough that every test runs in well under a second.
    """
    import torch
    from transformers import EncodecConfig, EncodecModel

    torch.manual_seed(7)
    config = EncodecConfig(
        target_bandwidths=[4.0],
        sampling_rate=16000,
        audio_channels=1,
        num_filters=8,
        hidden_size=32,
        num_residual_layers=1,
        upsampling_ratios=[8, 8],
        codebook_size=16,
        codebook_dim=32,
    )
    model = EncodecModel(config)
    # fresh codebooks are all-zero, which makes every quantizer pick the
    # same null codeword; scatter them so stage outputs are meaningful
    with torch.no_grad():
        for layer in model.quantizer.layers:
            layer.codebook.embed.normal_(0.0, 0.5)
            layer.codebook.embed_avg.copy_(layer.codebook.embed)
    path = tmp_path_factory.mktemp("ckpt") / "tiny"
    model.save_pretrained(path)
    return str(path)


def _tone_file(path, rate, seconds=1.0):
    t = np.arange(int(rate * seconds)) / rate
    samples = (0.25 * np.sin(2 * np.pi * 220.0 * t)).astype(np.float32)
    wavfile.write(path, rate, samples)
    return str(path)


@pytest.fixture(scope="session")
def tone_16k(tmp_path_factory):
    return _tone_file(tmp_path_factory.mktemp("wav") / "tone16.wav", 16000)


@pytest.fixture(scope="session")
def tone_8k(tmp_path_factory):
    return _tone_file(tmp_path_factory.mktemp("wav") / "tone8.wav", 8000)

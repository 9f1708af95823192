"""Seeded random number generation.

All randomness in the package flows through Philox (a 64-bit counter-based
generator), so any run is reproducible from its integer seed alone.
Frozen output vectors live in the test suite as the portability contract.
"""

from __future__ import annotations

import numpy as np


def philox_generator(seed: int) -> np.random.Generator:
    """A Generator backed by Philox4x64 keyed from ``seed``."""
    return np.random.Generator(np.random.Philox(int(seed)))


def gaussian_white(n: int, rng: np.random.Generator) -> np.ndarray:
    """n i.i.d. standard normal samples via Box-Muller on Philox uniforms.

    Box-Muller is used instead of the generator's native normal draw so the
    mapping from uniform stream to noise is an explicit closed form.
    """
    n_pairs = (n + 1) // 2
    u = rng.random((2, n_pairs))
    radius = np.sqrt(-2.0 * np.log1p(-u[0]))  # u in [0,1) so 1-u in (0,1]
    angle = 2.0 * np.pi * u[1]
    z = np.empty(2 * n_pairs)
    z[0::2] = radius * np.cos(angle)
    z[1::2] = radius * np.sin(angle)
    return z[:n]

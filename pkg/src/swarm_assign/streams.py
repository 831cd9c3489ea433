"""Named random sub-streams derived from one 64-bit seed.

Keeping each consumer on its own stream means, for example, that the
choice of assignment algorithm can never perturb target motion.
"""

import numpy as np

STREAMS = {
    "instance": 1,
    "ordering": 2,
    "target-motion": 3,
    "primitives": 4,
    "baseline": 5,
    "layout": 6,
}


def stream(seed: int, name: str, *keys: int) -> np.random.Generator:
    return np.random.default_rng(stream_seed(seed, name, *keys))


def stream_seed(seed: int, name: str, *keys: int) -> np.random.SeedSequence:
    return np.random.SeedSequence([seed & 0xFFFFFFFFFFFFFFFF, STREAMS[name], *keys])

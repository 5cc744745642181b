"""Named, independent random substreams derived from one master seed.

Every source of randomness in an episode (layout, waypoints, shadowing,
fading, demands) gets its own generator so that adding or removing one
consumer never shifts the draws seen by any other.  Per-timestep streams
fold the timestep index into the seed material instead of drawing
sequentially, so realizations at time t are reproducible in isolation.
"""

from __future__ import annotations

import numpy as np

# Fixed stream ids; changing these changes every episode, so they are
# part of the reproducibility contract.
STREAM_IDS = {
    "layout": 0,
    "waypoints": 1,
    "shadowing": 2,
    "fading": 3,
    "demands": 4,
}


def substream(seed: int, name: str, step: int | None = None) -> np.random.Generator:
    """Return the generator for one named stream of a master seed.

    seed: master seed of the episode (nonnegative int).
    name: one of STREAM_IDS.
    step: optional timestep index for streams that reset every step.
    """
    if name not in STREAM_IDS:
        raise ValueError(f"unknown stream name: {name!r}")
    if seed < 0:
        raise ValueError(f"seed must be nonnegative, got {seed}")
    entropy = [seed, STREAM_IDS[name]]
    if step is not None:
        entropy.append(step)
    return np.random.default_rng(np.random.SeedSequence(entropy))

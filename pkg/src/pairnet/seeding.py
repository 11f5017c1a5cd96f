"""Named random substreams derived from one root seed.

Every stochastic component (partition sampling, alpha sampling, holdout
splits, baseline init) draws from its own substream so that changing one
component's consumption never perturbs the others, and a run is exactly
reproducible from the root seed alone.
"""

from __future__ import annotations

import numpy as np

__all__ = ["substream", "PARTITION_STREAM", "ALPHA_STREAM", "HOLDOUT_STREAM", "MLP_STREAM"]

PARTITION_STREAM = 0
ALPHA_STREAM = 1
HOLDOUT_STREAM = 2
MLP_STREAM = 3


def substream(seed: int, *key: int) -> np.random.Generator:
    """Generator for the substream identified by (seed, key...)."""
    return np.random.default_rng(np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in key)))

"""Named random substreams derived from one root seed.

Every random choice in the toolkit (splitting, parameter init, batch
shuffling, dropout, synthetic generation) draws from its own named stream,
so changing one component's consumption pattern never perturbs the others.
"""

from __future__ import annotations

import hashlib

import numpy as np


def substream(seed: int, name: str) -> np.random.Generator:
    """A generator keyed by (root seed, stream name), stable across runs."""
    digest = hashlib.sha256(name.encode("utf-8")).digest()
    key = int.from_bytes(digest[:8], "little")
    return np.random.default_rng(np.random.SeedSequence([int(seed), key]))

"""Purpose-keyed derivation of independent random streams from one master seed.

Every stochastic component of an experiment (topology, shadowing, fading,
per-agent exploration, ...) pulls from its own named stream, so adding a new
consumer never shifts the draws of existing ones and whole runs stay a pure
function of the master seed.
"""

import hashlib

import numpy as np


def _purpose_key(purpose: str) -> int:
    digest = hashlib.sha256(purpose.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")


class SeedHierarchy:
    """Factory for named, index-addressable child RNG streams."""

    def __init__(self, master_seed: int):
        master_seed = int(master_seed)
        if master_seed < 0:
            raise ValueError("master seed must be non-negative")
        self.master_seed = master_seed

    def stream(self, purpose: str, index: int = 0) -> np.random.Generator:
        index = int(index)
        if index < 0:
            raise ValueError("stream index must be non-negative")
        seq = np.random.SeedSequence([self.master_seed, _purpose_key(purpose), index])
        return np.random.default_rng(seq)

    def child_seed(self, purpose: str, index: int = 0) -> int:
        """A derived master seed, for components that build their own hierarchy."""
        return int(self.stream(purpose, index).integers(0, 2**62))


def seed_hierarchy(master_seed: int) -> SeedHierarchy:
    return SeedHierarchy(master_seed)

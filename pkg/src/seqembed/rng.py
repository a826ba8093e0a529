"""Deterministic named random streams derived from one master seed."""

import zlib

import numpy as np


def substream(master_seed: int, *names: str) -> np.random.Generator:
    """Return an independent Generator for (master_seed, names).

    Every source of randomness in a run draws from a stream named here
    (e.g. ``substream(seed, "trial0", "walks")``), so components can be
    re-seeded independently and runs are reproducible end to end.
    """
    words = [master_seed & 0xFFFFFFFF, (master_seed >> 32) & 0xFFFFFFFF]
    words += [zlib.crc32(name.encode("utf-8")) for name in names]
    return np.random.default_rng(np.random.SeedSequence(words))


def kernel_seed(rng: np.random.Generator) -> int:
    """Draw a 32-bit seed for a jitted kernel's internal generator."""
    return int(rng.integers(0, 2**32))

"""Seeded, splittable random streams.

Trials are grouped into fixed-size blocks. Every block owns an independent
Philox stream derived from ``(seed, tag, block)`` through
:class:`numpy.random.SeedSequence`, so any trial can be replayed by
regenerating its block, and results do not depend on how blocks are spread
over workers.
"""

from __future__ import annotations

import zlib
from typing import Iterator

import numpy as np

BLOCK_SIZE = 4096


def _tag_id(tag: str) -> int:
    return zlib.crc32(tag.encode("utf-8"))


def block_rng(seed: int, block: int, tag: str = "default") -> np.random.Generator:
    """Generator for block ``block`` of the stream named ``tag``."""
    ss = np.random.SeedSequence(int(seed), spawn_key=(_tag_id(tag), int(block)))
    return np.random.Generator(np.random.Philox(ss))


def trial_rng(seed: int, trial: int, tag: str = "trial") -> np.random.Generator:
    """Generator dedicated to a single trial index (scalar APIs)."""
    return block_rng(seed, trial, tag)


def iter_blocks(trials: int, block_size: int = BLOCK_SIZE) -> Iterator[tuple[int, int, int]]:
    """Yield ``(block, start, size)`` covering ``range(trials)``."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    for block, start in enumerate(range(0, trials, block_size)):
        yield block, start, min(block_size, trials - start)


def locate_trial(trial: int, block_size: int = BLOCK_SIZE) -> tuple[int, int]:
    """Block index and offset inside the block for a global trial index."""
    return divmod(int(trial), block_size)

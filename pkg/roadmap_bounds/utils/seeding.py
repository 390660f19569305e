"""
Seeding
Deterministic random streams: per-trial seeds split from a master seed, and
PCG64 generators that can be saved and restored mid-stream.
"""

import copy
from typing import Any, Dict, Optional, Union

import numpy as np

SeedLike = Union[int, np.random.Generator, None]


def as_generator(seed: SeedLike = None) -> np.random.Generator:
    """Return seed unchanged if it is a Generator, else a fresh PCG64 stream"""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.PCG64(seed))


def trial_seed(master_seed: int, index: int) -> int:
    """
    64-bit seed of trial index, split from master_seed.

    Depends only on (master_seed, index), so adding trials never changes the
    seeds of earlier ones.
    """
    if master_seed < 0 or index < 0:
        raise ValueError(f"Seeds and indices must be non-negative, got master={master_seed}, index={index}")
    seq = np.random.SeedSequence(master_seed, spawn_key=(index,))
    return int(seq.generate_state(1, dtype=np.uint64)[0])


def generator_state(rng: np.random.Generator) -> Dict[str, Any]:
    """JSON-serializable snapshot of a PCG64 stream position"""
    return copy.deepcopy(rng.bit_generator.state)


def restore_generator(state: Optional[Dict[str, Any]]) -> np.random.Generator:
    """Rebuild a PCG64 generator positioned exactly at state"""
    if state is None:
        raise ValueError("No saved random-stream state to restore")
    if state.get("bit_generator") != "PCG64":
        raise ValueError(f"Unsupported bit generator {state.get('bit_generator')!r}, expected 'PCG64'")
    bit_gen = np.random.PCG64()
    bit_gen.state = copy.deepcopy(state)
    return np.random.Generator(bit_gen)

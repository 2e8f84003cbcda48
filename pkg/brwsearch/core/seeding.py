"""
Seed derivation for reproducible, scheduling-independent simulations.

Child seeds are spawned from a master seed and an integer key path, so
trial ``i`` of a run always sees the same stream no matter which worker
executes it or in which order.
"""
import numpy as np


def _sequence(master: int, keys: tuple) -> np.random.SeedSequence:
    # Key paths go into spawn_key; entropy padding would merge (m,) and (m, 0).
    return np.random.SeedSequence(int(master), spawn_key=tuple(int(k) for k in keys))


def derive_seed(master: int, *keys: int) -> int:
    """Derive a child seed from a master seed and a key path.

    Args:
        master: Master seed
        *keys: Integer keys identifying the child (e.g. target, graph index)

    Returns:
        A 63-bit integer seed
    """
    seq = _sequence(master, keys)
    return int(seq.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))


def child_rng(master: int, *keys: int) -> np.random.Generator:
    """Create a generator seeded from a master seed and a key path."""
    return np.random.default_rng(_sequence(master, keys))


def trial_rng(master: int, trial: int) -> np.random.Generator:
    """Create the generator used by trial ``trial`` of a run."""
    return child_rng(master, trial)

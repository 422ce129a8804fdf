import hashlib

import numpy as np


def sub_seed(seed: int, *names) -> int:
    """
    Derive a named sub-seed from the run seed.

    The derivation is a hash of the seed and the names, so adding a new consumer
    never shifts the random streams of existing ones.

    Parameters
    ----------
    seed : int
        The run seed from the configuration.
    names : str | int
        Path of the consumer, e.g. ``("gp", "restarts", region_id)``.

    Returns
    -------
    int
        A 63-bit seed.
    """
    key = ":".join([str(seed)] + [str(n) for n in names]).encode("utf-8")
    return int.from_bytes(hashlib.sha256(key).digest()[:8], "big") >> 1


def rng_for(seed: int, *names) -> np.random.Generator:
    """A numpy Generator seeded with ``sub_seed(seed, *names)``."""
    return np.random.default_rng(sub_seed(seed, *names))

"""Seed handling: every random stream is keyed by ``(seed, *indices)``."""
from __future__ import annotations

import os
import secrets

import numpy as np

SEED_ENV = "TMES_SEED"


def substream(seed: int, *keys: int) -> np.random.Generator:
    """Independent generator for ``(seed, *keys)``.

    Built on ``SeedSequence`` spawn keys, so the stream for replicate ``b``
    does not depend on how many other replicates were drawn or in what order.
    """
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in keys))
    return np.random.Generator(np.random.PCG64(ss))


def resolve_seed(seed: int | None = None) -> int:
    """Explicit seed, else ``$TMES_SEED``, else fresh 64-bit entropy."""
    if seed is not None:
        return int(seed)
    env = os.environ.get(SEED_ENV)
    if env:
        return int(env)
    return secrets.randbits(63)


def open_uniform(rng: np.random.Generator, size=None) -> np.ndarray:
    """Uniform draws on the open interval (0, 1)."""
    k = rng.integers(0, 2**53, size=size, dtype=np.int64)
    return (k + 0.5) / 2.0**53


def derive_seed(seed: int, *keys: int) -> int:
    """Deterministic 63-bit child seed for ``(seed, *keys)``."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in keys))
    return int(ss.generate_state(1, np.uint64)[0] >> np.uint64(1))

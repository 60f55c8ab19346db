"""Reproducible random streams.

Every stream is a ``numpy.random.Generator`` driven by the counter-based
Philox4x32-10 bit generator. The 128-bit key is derived by
``numpy.random.SeedSequence`` from the master seed plus an optional tuple of
non-negative integers (the *spawn key*), so the stream for, say,
``(seed, alpha_index, sample_index)`` does not depend on which thread or in
which order it is requested. Gaussian variates come from
``Generator.standard_normal`` (numpy's ziggurat transform of the Philox
output), which is deterministic across platforms for a given numpy version.
"""

from __future__ import annotations

import os

import numpy as np


def make_rng(seed: int, *key: int) -> np.random.Generator:
    """Return the generator for ``seed`` split along ``key``."""
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))


def max_workers() -> int:
    """Thread cap read from ``TDMV_THREADS`` (default: CPU count, at most 8)."""
    raw = os.environ.get("TDMV_THREADS")
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            pass
    return max(1, min(8, os.cpu_count() or 1))

"""Deterministic counter-based RNG streams.

Every random quantity in the library is drawn from a substream addressed by
(master_seed, domain, *indices).  Substreams are independent and do not
depend on the order in which they are created, so trials can run on any
number of workers and still produce bit-identical results.
"""
from __future__ import annotations

import numpy as np

# Domain tags keep unrelated draws out of each other's streams.
DOMAIN_CHANNEL = 0
DOMAIN_RANDOMIZATION = 1
DOMAIN_ATTACK = 2
DOMAIN_VALIDATION = 3
DOMAIN_ORACLE = 4


def substream(master_seed: int, domain: int, *indices: int) -> np.random.Generator:
    """Return a fresh generator for the addressed substream.

    The same address always yields a generator that produces the same
    sequence, regardless of how many other substreams were used before.
    """
    key = (int(master_seed), int(domain)) + tuple(int(i) for i in indices)
    return np.random.default_rng(np.random.SeedSequence(key))


def channel_stream(master_seed: int, trial: int, user: int) -> np.random.Generator:
    """Stream for the channel draw of one (trial, user) pair.

    Keyed by user index rather than by receiver count, so the first k draws
    of a trial are identical no matter how many receivers the sweep point
    has.  That makes per-trial metrics nested across a receiver-count sweep.
    """
    return substream(master_seed, DOMAIN_CHANNEL, trial, user)

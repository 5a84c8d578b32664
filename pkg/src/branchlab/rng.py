"""Reproducible random streams for the Monte Carlo simulators.

Streams are built on Philox, a counter-based 64-bit generator, keyed by
(seed, purpose, step).  Every simulator draws its variates for one step from
the stream labelled with that step, in a fixed order, so a run is bit-exact
reproducible from its seed regardless of chunking: a parallel implementation
splitting the per-step draw array across workers would produce the same
values from counter offsets.  Purposes are small fixed integers so distinct
simulators never share a stream.
"""

from __future__ import annotations

import numpy as np

PURPOSE_COAGULATION = 1
PURPOSE_GW = 2
PURPOSE_LAMPERTI = 3


def stream(seed: int, purpose: int, step: int) -> np.random.Generator:
    """Generator for one (seed, purpose, step) cell of the stream grid."""
    if seed < 0:
        raise ValueError("seed must be >= 0")
    ss = np.random.SeedSequence(entropy=int(seed),
                                spawn_key=(int(purpose), int(step)))
    return np.random.Generator(np.random.Philox(ss))

"""Counter-based random streams.

A stream is a pure function of ``(master_seed, *indices)``: the same indices
always give the same numbers, whichever worker asks for them and in whatever
order.  This is what makes results independent of the worker count.
"""

from __future__ import annotations

import numpy as np


def stream(master_seed: int, *indices: int) -> np.random.Generator:
    key = np.random.SeedSequence([int(master_seed) & 0xFFFFFFFFFFFFFFFF, *map(int, indices)])
    return np.random.Generator(np.random.Philox(key))

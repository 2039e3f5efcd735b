"""Counter-based seed derivation: (master seed, keys...) -> independent 32-bit seed."""
from __future__ import annotations

import numpy as np


def derive_seed(master: int, *keys: int) -> int:
    ss = np.random.SeedSequence(entropy=int(master), spawn_key=tuple(int(k) for k in keys))
    return int(ss.generate_state(1, dtype=np.uint32)[0])

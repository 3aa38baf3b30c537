"""Counter-based seed derivation.

Trial seeds are derived from a master seed and integer counters with a
SplitMix64 mix, so any cell of a sweep can be reproduced in isolation without
replaying the cells before it.
"""

MASK = (1 << 64) - 1


def _splitmix64(state: int) -> int:
    # Constants from Steele et al., "Fast splittable pseudorandom number
    # generators"; full-avalanche finalizer over a 64-bit counter stream.
    state = (state + 0x9E3779B97F4A7C15) & MASK
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK
    return z ^ (z >> 31)


def derive_seed(master_seed: int, *counters: int) -> int:
    """Mix a master seed with counters into an independent 64-bit seed."""
    state = _splitmix64(master_seed & MASK)
    for c in counters:
        state = _splitmix64(state ^ _splitmix64(c & MASK))
    return state

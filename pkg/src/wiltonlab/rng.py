"""Counter-based pseudorandom generator used everywhere in this package.

The generator is the SplitMix64 output function evaluated in counter mode:
every draw is a pure function of (seed, stream, index, draw counter), so any
sample can be produced by any worker in any order and results never depend
on the number of workers.  Constants:

    GOLDEN  = 0x9E3779B97F4A7C15   (2^64 / golden ratio, SplitMix64 increment)
    MIX1    = 0xBF58476D1CE4E5B9   (SplitMix64 finalizer)
    MIX2    = 0x94D049BB133111EB   (SplitMix64 finalizer)
    SALT_A  = 0x6A09E667F3BCC909   (frac(sqrt 2), SHA-512 IV word)
    SALT_B  = 0xBB67AE8584CAA73B   (frac(sqrt 3), SHA-512 IV word)

The compiled kernel reimplements the identical scheme in C; the two must
stay in lockstep bit for bit.
"""

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
MIX1 = 0xBF58476D1CE4E5B9
MIX2 = 0x94D049BB133111EB
SALT_A = 0x6A09E667F3BCC909
SALT_B = 0xBB67AE8584CAA73B

_TWO53_INV = 2.0 ** -53


def mix64(z: int) -> int:
    """SplitMix64 finalizer: a bijective scramble of a 64-bit word."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * MIX1) & MASK64
    z = ((z ^ (z >> 27)) * MIX2) & MASK64
    return z ^ (z >> 31)


def stream_base(seed: int, stream: int, index: int) -> int:
    """64-bit base state for the (seed, stream, index) substream."""
    h = mix64((seed & MASK64) ^ GOLDEN)
    h = mix64(h ^ ((stream + SALT_A) & MASK64))
    h = mix64(h ^ ((index + SALT_B) & MASK64))
    return h


def raw64(base: int, j: int) -> int:
    """j-th 64-bit word of the substream rooted at `base`."""
    return mix64((base + (j + 1) * GOLDEN) & MASK64)


def uniform53(base: int, j: int) -> float:
    """j-th uniform double in the open interval (0, 1).

    Uses the top 53 bits plus a half-ulp offset so 0.0 and 1.0 never occur
    and logarithms of draws are always finite.
    """
    return ((raw64(base, j) >> 11) + 0.5) * _TWO53_INV


def randbits(base: int, j0: int, nbits: int) -> tuple[int, int]:
    """nbits-wide integer assembled from consecutive words; returns
    (value, next draw counter)."""
    if nbits <= 0:
        return 0, j0
    words = (nbits + 63) // 64
    acc = 0
    for w in range(words):
        acc |= raw64(base, j0 + w) << (64 * w)
    return acc & ((1 << nbits) - 1), j0 + words

"""Exact continued-fraction arithmetic on big-integer rationals.

Sample points are dyadic rationals p/2^bits standing in for "random
irrationals" at finite depth.  Orbits of the Gauss map x -> {1/x} are just
the Euclidean remainder sequence of (2^bits, p), so every alpha along the
orbit is exact and deep orbits carry no rounding error.  Floating-point
views (logs, cumulative products) are derived from the exact integers with
correctly rounded big-integer division.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .rng import randbits, stream_base

# two-part ln 2 (fdlibm split): e*LN2_HI is exact for |e| < 2^20
LN2_HI = 6.93147180369123816490e-01
LN2_LO = 1.90821492927058770002e-10

_SQRT2_M1 = 0.41421356237309503   # sqrt(2) - 1
_INVSQRT2_M1 = -0.29289321881345254  # 1/sqrt(2) - 1


@dataclass(frozen=True, slots=True)
class ExactPoint:
    """A rational in [0, 1) held in lowest terms as a pair of big integers."""

    numerator: int
    denominator: int

    def __post_init__(self):
        if self.denominator < 1 or not (0 <= self.numerator < self.denominator):
            raise ValueError(f"not a rational in [0,1): {self.numerator}/{self.denominator}")

    @classmethod
    def reduced(cls, numerator: int, denominator: int) -> "ExactPoint":
        g = math.gcd(numerator, denominator)
        if g > 1:
            numerator //= g
            denominator //= g
        if numerator == 0:
            denominator = 1
        return cls(numerator, denominator)

    @property
    def is_zero(self) -> bool:
        return self.numerator == 0

    def __float__(self) -> float:
        # CPython big-int true division is correctly rounded
        return self.numerator / self.denominator

    def __str__(self) -> str:
        return f"{self.numerator}/{self.denominator}"


ZERO = ExactPoint(0, 1)


def parse_point(text: str) -> ExactPoint:
    """Parse 'p/q' into an ExactPoint, reducing to lowest terms."""
    p_str, _, q_str = text.partition("/")
    if not q_str:
        raise ValueError(f"expected 'p/q', got {text!r}")
    return ExactPoint.reduced(int(p_str), int(q_str))


def sample_point(seed: int, bits: int, stream: int = 0) -> ExactPoint:
    """Deterministic dyadic sample p/2^bits with p odd, uniform over odds.

    Identical (seed, bits, stream) always yields the identical point; the
    draw is counter-based, see rng.py.
    """
    if bits < 1:
        raise ValueError("bits must be >= 1")
    base = stream_base(seed, stream, 0)
    top, _ = randbits(base, 0, bits - 1)
    p = (top << 1) | 1
    return ExactPoint(p, 1 << bits)


def gauss_map(x: ExactPoint) -> ExactPoint:
    """One step of x -> {1/x}; exact, terminates at the canonical zero."""
    if x.is_zero:
        raise ValueError("Gauss map undefined at 0 (orbit terminated)")
    r = x.denominator % x.numerator
    if r == 0:
        return ZERO
    # remainder pairs inherit coprimality, no reduction needed
    return ExactPoint(r, x.numerator)


def log_of_rational(p: int, q: int) -> float:
    """log(p/q) for positive big integers of arbitrary bit length.

    Splits off the power of two (exponent * ln 2 with a two-part constant)
    and evaluates log1p on an exactly computed mantissa ratio in
    [1/sqrt2, sqrt2), keeping the relative error at a couple of ulps even
    when p/q is close to 1.
    """
    if p <= 0:
        raise ValueError("log_of_rational requires p >= 1")
    if q <= 0:
        raise ValueError("log_of_rational requires q >= 1")
    if p == q:
        return 0.0
    e = p.bit_length() - q.bit_length()
    if e >= 0:
        p2, q2 = p, q << e
    else:
        p2, q2 = p << (-e), q
    # p2/q2 in [1/2, 2); steer into [1/sqrt2, sqrt2)
    t = (p2 - q2) / q2
    if t > _SQRT2_M1:
        e += 1
        q2 <<= 1
        t = (p2 - q2) / q2
    elif t < _INVSQRT2_M1:
        e -= 1
        p2 <<= 1
        t = (p2 - q2) / q2
    r = math.log1p(t)
    if e == 0:
        return r
    return (e * LN2_HI + r) + e * LN2_LO


@dataclass(frozen=True, slots=True)
class CFExpansion:
    """Partial quotients and convergents of a rational in (0, 1)."""

    quotients: list[int]
    convergents: list[tuple[int, int]]

    def back_substitute(self) -> ExactPoint:
        """Fold the quotients back into the rational they expand."""
        num, den = 0, 1  # value of the empty tail
        for a in reversed(self.quotients):
            # x = 1 / (a + tail)
            num, den = den, a * den + num
        return ExactPoint.reduced(num, den)


def cf_expand(x: ExactPoint, max_terms: int = 10_000) -> CFExpansion:
    """Canonical continued fraction [0; a1, a2, ...] of x, truncated at
    max_terms.  Convergents satisfy the standard two-term recurrence
    exactly; a finite expansion is returned whole if it ends sooner.
    """
    if x.is_zero or x.numerator >= x.denominator:
        raise ValueError("cf_expand requires 0 < x < 1")
    if max_terms < 1:
        raise ValueError("max_terms must be >= 1")
    quotients: list[int] = []
    convergents: list[tuple[int, int]] = []
    p_prev, q_prev = 1, 0
    p_cur, q_cur = 0, 1
    num, den = x.numerator, x.denominator
    while num and len(quotients) < max_terms:
        a, r = divmod(den, num)
        quotients.append(a)
        p_prev, p_cur = p_cur, a * p_cur + p_prev
        q_prev, q_cur = q_cur, a * q_cur + q_prev
        convergents.append((p_cur, q_cur))
        den, num = num, r
    return CFExpansion(quotients, convergents)


@dataclass(frozen=True, slots=True)
class GaussOrbit:
    """Exact Gauss-map orbit with floating-point side products.

    points[k] is alpha_k; if the orbit terminates the canonical zero is the
    final point.  logs[k] = log(1/alpha_k) and betas[k] = alpha_0...alpha_k
    are kept only for the nonzero points; betas come from the telescoped
    remainder ratio r_{k+1}/r_0 and are therefore correctly rounded.
    """

    points: list[ExactPoint]
    logs: list[float]
    betas: list[float]
    depth: int

    @property
    def x(self) -> ExactPoint:
        return self.points[0]

    @property
    def nonzero(self) -> int:
        """Number of nonzero orbit points (= len(logs))."""
        return len(self.logs)

    @property
    def terminated(self) -> bool:
        return self.points[-1].is_zero

    def to_json_dict(self) -> dict:
        quotients = cf_expand(self.x, max_terms=max(self.depth, 1)).quotients
        return {
            "x": str(self.x),
            "quotients": quotients,
            "alphas": [str(pt) for pt in self.points],
        }


def orbit(x: ExactPoint, n: int) -> GaussOrbit:
    """Exact orbit alpha_0 .. alpha_min(n, termination) of the Gauss map.

    The remainder sequence r_0 = denominator, r_1 = numerator,
    r_{k+1} = r_{k-1} mod r_k carries the whole orbit: alpha_k =
    r_{k+1}/r_k and beta_k = r_{k+1}/r_0.
    """
    if x.is_zero or x.numerator >= x.denominator:
        raise ValueError("orbit requires 0 < x < 1")
    if n < 0:
        raise ValueError("n must be >= 0")
    r0 = x.denominator
    points = [x]
    logs = [log_of_rational(x.denominator, x.numerator)]
    betas = [x.numerator / x.denominator]
    r_prev, r_cur = x.denominator, x.numerator
    for _ in range(n):
        r_next = r_prev % r_cur
        if r_next == 0:
            points.append(ZERO)
            break
        points.append(ExactPoint(r_next, r_cur))
        logs.append(log_of_rational(r_cur, r_next))
        betas.append(r_next / r0)
        r_prev, r_cur = r_cur, r_next
    return GaussOrbit(points=points, logs=logs, betas=betas, depth=len(points) - 1)

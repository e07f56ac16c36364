"""Cotangent sums c0(r/b) and their normalized even moments.

c0(r/b) = -sum_{m=1}^{b-1} (m/b) cot(pi m r / b) is evaluated in the folded
half-range form (pairing m with b-m), with the cotangent argument reduced
to (0, 1/2] to dodge cancellation near the period.  Moments over a coprime
residue window [A0 b, A1 b] are normalized by phi(b), b^(2k) and the window
width; their growth against (2k)!/pi^(2k) is the object of interest.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels, parallel


def euler_phi(b: int) -> int:
    """Euler totient by trial-division factorization."""
    if b < 1:
        raise ValueError("b must be >= 1")
    result = b
    n = b
    p = 2
    while p * p <= n:
        if n % p == 0:
            while n % p == 0:
                n //= p
            result -= result // p
        p += 1 if p == 2 else 2
    if n > 1:
        result -= result // n
    return result


def c0_sum(r: int, b: int) -> float:
    """The cotangent sum c0(r/b) for gcd(r, b) = 1, r reduced mod b."""
    if b < 1:
        raise ValueError("b must be >= 1")
    r %= b
    if math.gcd(r, b) != 1:
        raise ValueError(f"gcd({r}, {b}) != 1")
    if b <= 2:
        return 0.0
    return float(kernels.c0_block(b, np.array([r], dtype=np.uint64))[0])


def c0_direct(r: int, b: int) -> float:
    """Unfolded (b-1)-term evaluation, kept as the slow cross-check."""
    r %= b
    if math.gcd(r, b) != 1:
        raise ValueError(f"gcd({r}, {b}) != 1")
    total = 0.0
    for m in range(1, b):
        t = (m * r) % b
        u = min(t, b - t)
        if u == 0:
            continue
        cot = math.cos(math.pi * u / b) / math.sin(math.pi * u / b)
        if 2 * t > b:
            cot = -cot
        total -= (m / b) * cot
    return total


def coprime_range(b: int, a0: float, a1: float) -> np.ndarray:
    """Residues r with a0*b <= r <= a1*b and gcd(r, b) = 1."""
    lo = math.ceil(a0 * b)
    hi = math.floor(a1 * b)
    return np.array([r for r in range(lo, hi + 1) if math.gcd(r, b) == 1], dtype=np.uint64)


@dataclass(frozen=True, slots=True)
class CotangentMomentRun:
    b: int
    A0: float
    A1: float
    ks: list[int]
    hk: dict[int, float]
    count: int

    def to_csv_rows(self) -> list[dict]:
        return [
            {"b": self.b, "A0": self.A0, "A1": self.A1, "k": k,
             "Hk": self.hk[k], "count": self.count}
            for k in self.ks
        ]

    def to_json_dict(self) -> dict:
        return {
            "b": self.b, "A0": self.A0, "A1": self.A1, "ks": list(self.ks),
            "hk": {str(k): self.hk[k] for k in self.ks}, "count": self.count,
        }


def _validate_window(b: int, a0: float, a1: float, full_window: bool) -> None:
    if b < 3:
        raise ValueError("b must be >= 3")
    lo = 0.0 if full_window else 0.5
    if not (lo < a0 < a1 < 1.0):
        raise ValueError(f"need {lo} < A0 < A1 < 1, got A0={a0}, A1={a1}")


def cotangent_moments(
    b: int,
    a0: float = 0.51,
    a1: float = 0.99,
    ks: list[int] | None = None,
    full_window: bool = False,
    threads: int | None = None,
) -> CotangentMomentRun:
    """Normalized moments H_k over the coprime window, one c0 pass shared
    by every k.  full_window lifts the default 1/2 < A0 constraint."""
    _validate_window(b, a0, a1, full_window)
    if ks is None:
        ks = [1, 2, 3, 4]
    if any(k < 0 for k in ks):
        raise ValueError("every k must be >= 0")
    rs = coprime_range(b, a0, a1)
    count = len(rs)
    if count == 0:
        raise ValueError(f"empty residue range (count = 0) for b={b}")
    values = np.empty(count, dtype=np.float64)

    def chunk(i0: int, i1: int) -> None:
        values[i0:i1] = kernels.c0_block(b, rs[i0:i1])

    parallel.map_chunks(count, chunk, threads=threads)
    phi = euler_phi(b)
    norm = 1.0 / (phi * (a1 - a0))
    scaled = values / b  # (c0/b)^2k keeps intermediates in range even for k = 5
    hk: dict[int, float] = {}
    for k in sorted(set(ks)):
        if k == 0:
            hk[0] = norm * count
        else:
            hk[k] = norm * float(np.sum(scaled ** (2 * k)))
    return CotangentMomentRun(b=b, A0=a0, A1=a1, ks=sorted(set(ks)), hk=hk, count=count)


def hk_cotangent(
    b: int,
    a0: float,
    a1: float,
    k: int,
    full_window: bool = False,
    threads: int | None = None,
) -> float:
    """Single normalized moment H_k at modulus b."""
    run = cotangent_moments(b, a0, a1, ks=[k], full_window=full_window, threads=threads)
    return run.hk[k]


@dataclass(frozen=True, slots=True)
class RadiusProfile:
    """rho_k = (H_k / (2k)!)^(1/k); the documented expectation is a drift
    toward 1/pi^2 ~ 0.101321 as k grows."""

    rho: dict[int, float]
    degenerate: bool = False

    def to_csv_rows(self) -> list[dict]:
        inv_pi2 = 1.0 / math.pi**2
        return [
            {"k": k, "rho": v, "ratio_to_inv_pi2": v / inv_pi2}
            for k, v in sorted(self.rho.items())
        ]


def radius_profile(run: CotangentMomentRun) -> RadiusProfile:
    """Radius-of-convergence diagnostic from a moment run with k = 1..K."""
    ks = [k for k in run.ks if k >= 1]
    if len(ks) < 3 or ks != list(range(1, len(ks) + 1)):
        raise ValueError("run must contain k = 1..K with K >= 3")
    degenerate = False
    rho: dict[int, float] = {}
    for k in ks:
        h = run.hk[k]
        if h <= 0.0:
            degenerate = True
            rho[k] = 0.0
            continue
        rho[k] = (h / math.factorial(2 * k)) ** (1.0 / k)
    return RadiusProfile(rho=rho, degenerate=degenerate)

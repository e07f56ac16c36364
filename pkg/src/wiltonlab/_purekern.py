"""Pure-Python / numpy fallback kernels.

These are the reference implementations of the hot loops; the compiled
extension (_ckern) mirrors them operation for operation, including the
order in which pseudorandom words are consumed, so the two backends agree
to floating-point noise and can be cross-checked in tests.
"""

from __future__ import annotations

import math

import numpy as np

from .rng import randbits, stream_base, uniform53

BACKEND = "pure"

LN2 = 0.6931471805599453
LN2_HI = 6.93147180369123816490e-01
LN2_LO = 1.90821492927058770002e-10

KIND_LOG = 0
KIND_TRUNC = 1
KIND_G = 2
KIND_WILTON = 3

MEASURE_LEBESGUE = 0
MEASURE_GAUSS = 1

FLAG_OK = 0
FLAG_SINGULAR = 1
FLAG_NONFINITE = 2

_TWO53 = 9007199254740992.0  # 2^53


def _biglog(r: int) -> float:
    """log of a positive big integer via its top 64 bits plus exponent."""
    bl = r.bit_length()
    if bl <= 64:
        return math.log(r)
    e = bl - 64
    return (e * LN2_HI + math.log(r >> e)) + e * LN2_LO


def _bigratio2(r: int, bits: int) -> float:
    """r / 2^bits as a double, from the top 64 bits of r."""
    bl = r.bit_length()
    if bl <= 64:
        return math.ldexp(float(r), -bits)
    sh = bl - 64
    return math.ldexp(float(r >> sh), sh - bits)


def _sample_dyadic(base: int, j: int, comp: int, shape: int, bits: int):
    """Draw the exact odd numerator m of x = m/2^bits for one proposal
    component (0 left, 1 right, 2 uniform).  Returns (m, next_j) or
    (0, next_j) for a draw that collapses to the boundary."""
    if comp == 2:
        m, j = randbits(base, j, bits - 1)
        return (m << 1) | 1, j
    u = 0.0
    for _ in range(shape):
        u -= math.log(uniform53(base, j))
        j += 1
    xr = math.exp(-u) if comp == 0 else -math.expm1(-u)
    if not 0.0 < xr < 1.0:
        return 0, j
    fr, ex = math.frexp(xr)
    m0 = int(fr * _TWO53)
    e_bits = 53 - ex
    if e_bits > bits:
        return 0, j
    ref, j = randbits(base, j, bits - e_bits)
    return ((m0 << (bits - e_bits)) | ref) | 1, j


def _trunc_sum(m: int, bits: int, n: int) -> float:
    """Alternating transfer-power sum through order n at x = m/2^bits,
    straight off the Euclidean remainder sequence."""
    a = 1 << bits
    b = m
    lg_a = _biglog(a)
    total = 0.0
    sign = 1.0
    for _ in range(n + 1):
        if b == 0:
            break
        lg_b = _biglog(b)
        total += sign * _bigratio2(a, bits) * (lg_a - lg_b)
        sign = -sign
        a, b = b, a % b
        lg_a = lg_b
    return total


def _wilton_sum(m: int, bits: int, tol: float) -> float:
    """Tolerance-stopped alternating sum at x = m/2^bits."""
    a = 1 << bits
    b = m
    lg_a = _biglog(a)
    total = 0.0
    sign = 1.0
    while b != 0:
        lg_b = _biglog(b)
        gamma = _bigratio2(a, bits) * (lg_a - lg_b)
        total += sign * gamma
        sign = -sign
        beta = _bigratio2(b, bits)
        if gamma < tol and beta < tol:
            break
        a, b = b, a % b
        lg_a = lg_b
    return total


def _g_value(m: int, bits: int, g_terms: int, g_avg: bool) -> float:
    m96 = m >> (bits - 96) if bits >= 96 else m << (96 - bits)
    s1, s2 = g_partial_pair(m96, g_terms, 2 * g_terms if g_avg else 0)
    return 0.5 * (s1 + s2) if g_avg else s1


def moment_block(
    kind: int,
    k: int,
    n: int,
    g_terms: int,
    g_avg: bool,
    tol: float,
    measure: int,
    bits: int,
    seed: int,
    stream: int,
    i0: int,
    i1: int,
    wl: float,
    wr: float,
    wu: float,
    out: np.ndarray,
    flags: np.ndarray,
) -> None:
    """Weighted integrand values f(x_i)^(2k) * target(x_i) / proposal(x_i)
    for sample indices i0 <= i < i1.  out and flags are filled in place."""
    shape = 2 * k + 1
    gnorm = float(math.factorial(2 * k))
    two_k = float(2 * k)
    pow2bits = 1 << bits
    for idx in range(i0, i1):
        pos = idx - i0
        base = stream_base(seed, stream, idx)
        c = uniform53(base, 0)
        comp = 0 if c < wl else (1 if c < wl + wr else 2)
        m, _ = _sample_dyadic(base, 1, comp, shape, bits)
        if m == 0:
            out[pos] = 0.0
            flags[pos] = FLAG_SINGULAR
            continue
        xd = _bigratio2(m, bits)
        onemxd = _bigratio2(pow2bits - m, bits)
        lx = -math.log(xd) if xd < 0.5 else -math.log1p(-onemxd)
        l1mx = -math.log(onemxd) if onemxd < 0.5 else -math.log1p(-xd)
        plx = math.pow(lx, two_k)
        pl1 = math.pow(l1mx, two_k)
        q = (wl * plx + wr * pl1) / gnorm + wu
        pt = 1.0 if measure == MEASURE_LEBESGUE else 1.0 / ((1.0 + xd) * LN2)
        if kind == KIND_LOG:
            f_pow = plx
        elif kind == KIND_TRUNC:
            f_pow = math.pow(abs(_trunc_sum(m, bits, n)), two_k)
        elif kind == KIND_G:
            f_pow = math.pow(abs(_g_value(m, bits, g_terms, g_avg)), two_k)
        elif kind == KIND_WILTON:
            f_pow = math.pow(abs(_wilton_sum(m, bits, tol)), two_k)
        else:
            raise ValueError(f"unknown integrand kind {kind}")
        v = f_pow * pt / q
        if math.isfinite(v):
            out[pos] = v
            flags[pos] = FLAG_OK
        else:
            out[pos] = 0.0
            flags[pos] = FLAG_NONFINITE


def transfer_block(
    bits: int,
    seed: int,
    stream: int,
    i0: int,
    i1: int,
    nmax: int,
    out_t: np.ndarray,
    out_x: np.ndarray,
) -> None:
    """Transfer powers (T^nu l)(x_i) for nu = 0..nmax at uniform odd dyadic
    samples x_i; out_t[i-i0, nu] and out_x[i-i0] are filled in place."""
    pow2bits = 1 << bits
    for idx in range(i0, i1):
        pos = idx - i0
        base = stream_base(seed, stream, idx)
        m, _ = randbits(base, 0, bits - 1)
        m = (m << 1) | 1
        out_x[pos] = _bigratio2(m, bits)
        a, b = pow2bits, m
        lg_a = _biglog(a)
        for nu in range(nmax + 1):
            if b == 0:
                out_t[pos, nu:] = 0.0
                break
            lg_b = _biglog(b)
            out_t[pos, nu] = _bigratio2(a, bits) * (lg_a - lg_b)
            a, b = b, a % b
            lg_a = lg_b


def g_partial_pair(m96: int, n1: int, n2: int) -> tuple[float, float]:
    """Partial sums of sum (1 - 2*frac(l*x))/l at truncations n1 and n2
    (n2 = 0 skips the second), where x is given by its top 96 fractional
    bits.  Vectorized over l with an exact 33-bit chunk split."""
    n_top = max(n1, n2)
    c1 = float(m96 >> 63) * 2.0**-33
    c2 = float((m96 >> 30) & ((1 << 33) - 1)) * 2.0**-66
    c3 = float(m96 & ((1 << 30) - 1)) * 2.0**-96
    ls = np.arange(1, n_top + 1, dtype=np.float64)
    f = ls * c1
    f -= np.floor(f)
    f += ls * c2
    f += ls * c3
    f -= np.floor(f)
    terms = (1.0 - 2.0 * f) / ls
    s1 = float(np.sum(terms[:n1]))
    s2 = float(np.sum(terms)) if n2 else 0.0
    return s1, s2


def c0_block(b: int, rs: np.ndarray) -> np.ndarray:
    """Cotangent sums c0(r/b) for an array of residues r, using the folded
    half-range form with the argument reduced to (0, 1/2]."""
    half = (b - 1) // 2
    m = np.arange(1, half + 1, dtype=np.int64)
    coef = 1.0 - 2.0 * m / b
    scale = math.pi / b
    out = np.empty(len(rs), dtype=np.float64)
    for i, r in enumerate(rs):
        t = (m * int(r)) % b
        u = np.minimum(t, b - t)
        ang = scale * u
        cot = np.cos(ang) / np.sin(ang)
        signs = np.where(2 * t < b, 1.0, -1.0)
        out[i] = np.sum(coef * signs * cot)
    return out

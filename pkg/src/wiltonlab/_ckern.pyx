# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels: GMP-backed exact orbits, cotangent batches, and the
sawtooth-series inner loop.

Mirrors _purekern.py operation for operation (same pseudorandom word
consumption, same formulas); see that module for the reference semantics.
"""

import numpy as np

from libc.math cimport (cos, exp, expm1, fabs, frexp, isfinite, ldexp, log,
                        log1p, pow as cpow, sin)
from libc.stdint cimport int64_t, uint8_t, uint32_t, uint64_t
from libc.stdlib cimport free, malloc
from libc.string cimport memset

cdef extern from "gmp.h":
    ctypedef unsigned long mp_limb_t
    ctypedef long mp_size_t
    int mp_bits_per_limb
    void mpn_tdiv_qr(mp_limb_t *qp, mp_limb_t *rp, mp_size_t qxn,
                     const mp_limb_t *num_p, mp_size_t nn,
                     const mp_limb_t *den_p, mp_size_t dn) nogil
    mp_limb_t mpn_sub(mp_limb_t *rp, const mp_limb_t *s1p, mp_size_t s1n,
                      const mp_limb_t *s2p, mp_size_t s2n) nogil

cdef extern from *:
    r"""
    #include <stdint.h>
    typedef unsigned __int128 wl_u128;

    /* Partial sums of sum_l (1 - 2 frac(l x))/l at truncations n1 <= n2,
       with x given by its top 96 fractional bits.  frac accumulates as an
       exact 96-bit integer; tab1[l] = 1/l, tab2[l] = 2^-63/l. */
    static void wl_g_sums(uint64_t hi, uint64_t lo, long n1, long n2,
                          const double *tab1, const double *tab2,
                          double *out1, double *out2) {
        const wl_u128 m96 = (((wl_u128)hi) << 64) | lo;
        const wl_u128 mask = (((wl_u128)1) << 96) - 1;
        wl_u128 t = 0;
        double a0 = 0.0, a1 = 0.0, a2 = 0.0, a3 = 0.0;
        double s1 = 0.0;
        long l = 1;
        long top = n1;
        int phase;
        for (phase = 0; phase < 2; phase++) {
            for (; l + 3 <= top; l += 4) {
                wl_u128 t1 = (t + m96) & mask;
                wl_u128 t2 = (t1 + m96) & mask;
                wl_u128 t3 = (t2 + m96) & mask;
                wl_u128 t4 = (t3 + m96) & mask;
                a0 += tab1[l]     - (double)(uint64_t)(t1 >> 32) * tab2[l];
                a1 += tab1[l + 1] - (double)(uint64_t)(t2 >> 32) * tab2[l + 1];
                a2 += tab1[l + 2] - (double)(uint64_t)(t3 >> 32) * tab2[l + 2];
                a3 += tab1[l + 3] - (double)(uint64_t)(t4 >> 32) * tab2[l + 3];
                t = t4;
            }
            for (; l <= top; l++) {
                t = (t + m96) & mask;
                a0 += tab1[l] - (double)(uint64_t)(t >> 32) * tab2[l];
            }
            if (phase == 0) {
                s1 = (a0 + a1) + (a2 + a3);
                if (n2 <= n1) break;
                top = n2;
            }
        }
        *out1 = s1;
        *out2 = (n2 > n1) ? ((a0 + a1) + (a2 + a3)) : 0.0;
    }
    """
    void wl_g_sums(uint64_t hi, uint64_t lo, long n1, long n2,
                   const double *tab1, const double *tab2,
                   double *out1, double *out2) nogil

if mp_bits_per_limb != 64:
    raise ImportError("wiltonlab._ckern requires 64-bit GMP limbs")

BACKEND = "compiled"

DEF MAXL = 40  # supports bits <= 2048 with headroom

cdef double LN2 = 0.6931471805599453
cdef double LN2_HI = 6.93147180369123816490e-01
cdef double LN2_LO = 1.90821492927058770002e-10
cdef double TWO53 = 9007199254740992.0
cdef double INV53 = 1.0 / 9007199254740992.0

cdef uint64_t GOLDEN = <uint64_t>0x9E3779B97F4A7C15
cdef uint64_t MIX1 = <uint64_t>0xBF58476D1CE4E5B9
cdef uint64_t MIX2 = <uint64_t>0x94D049BB133111EB
cdef uint64_t SALT_A = <uint64_t>0x6A09E667F3BCC909
cdef uint64_t SALT_B = <uint64_t>0xBB67AE8584CAA73B

cdef enum:
    C_KIND_LOG = 0
    C_KIND_TRUNC = 1
    C_KIND_G = 2
    C_KIND_WILTON = 3
    C_MEASURE_LEBESGUE = 0
    C_FLAG_OK = 0
    C_FLAG_SINGULAR = 1
    C_FLAG_NONFINITE = 2

KIND_LOG = 0
KIND_TRUNC = 1
KIND_G = 2
KIND_WILTON = 3
MEASURE_LEBESGUE = 0
MEASURE_GAUSS = 1
FLAG_OK = 0
FLAG_SINGULAR = 1
FLAG_NONFINITE = 2


# ---------------------------------------------------------------- RNG

cdef inline uint64_t mix64(uint64_t z) nogil:
    z = (z ^ (z >> 30)) * MIX1
    z = (z ^ (z >> 27)) * MIX2
    return z ^ (z >> 31)


cdef inline uint64_t stream_base(uint64_t seed, uint64_t stream, uint64_t index) nogil:
    cdef uint64_t h = mix64(seed ^ GOLDEN)
    h = mix64(h ^ (stream + SALT_A))
    return mix64(h ^ (index + SALT_B))


cdef inline uint64_t raw64(uint64_t base, uint64_t j) nogil:
    return mix64(base + (j + 1) * GOLDEN)


cdef inline double uniform53(uint64_t base, uint64_t j) nogil:
    return (<double>(raw64(base, j) >> 11) + 0.5) * INV53


# ------------------------------------------------- big-integer helpers

cdef inline int bl_limbs(const mp_limb_t *a, mp_size_t n) nogil:
    cdef uint64_t top = a[n - 1]
    cdef int c = 0
    while top >= (<uint64_t>1 << 32):
        top >>= 32
        c += 32
    while top > 1:
        top >>= 1
        c += 1
    return 64 * (<int>n - 1) + c + 1


cdef inline uint64_t top64_limbs(const mp_limb_t *a, mp_size_t n, int bl) nogil:
    cdef int hb
    if bl <= 64:
        return a[0]
    hb = bl - 64 * (<int>n - 1)
    if hb == 64:
        return a[n - 1]
    return (a[n - 1] << (64 - hb)) | (a[n - 2] >> hb)


cdef inline double lg_limbs(const mp_limb_t *a, mp_size_t n) nogil:
    """log of a positive big integer via its top 64 bits plus exponent."""
    cdef int bl = bl_limbs(a, n)
    cdef int e
    if bl <= 64:
        return log(<double>a[0])
    e = bl - 64
    return (e * LN2_HI + log(<double>top64_limbs(a, n, bl))) + e * LN2_LO


cdef inline double ratio2_limbs(const mp_limb_t *a, mp_size_t n, int bits) nogil:
    """a / 2^bits as a double, from the top 64 bits of a."""
    cdef int bl = bl_limbs(a, n)
    if bl <= 64:
        return ldexp(<double>a[0], -bits)
    return ldexp(<double>top64_limbs(a, n, bl), bl - 64 - bits)


cdef inline mp_size_t normalize(const mp_limb_t *a, mp_size_t n) nogil:
    while n > 1 and a[n - 1] == 0:
        n -= 1
    return n


cdef inline mp_size_t set_pow2(mp_limb_t *a, int bits) nogil:
    memset(a, 0, MAXL * sizeof(mp_limb_t))
    a[bits >> 6] = <mp_limb_t>1 << (bits & 63)
    return (bits >> 6) + 1


cdef inline uint64_t extract_bits(const mp_limb_t *a, mp_size_t n, int start) nogil:
    """64 bits of the value starting at bit `start`, zero-padded above."""
    cdef int idx = start >> 6
    cdef int off = start & 63
    cdef uint64_t lo_part = a[idx] if idx < n else 0
    cdef uint64_t hi_part = a[idx + 1] if idx + 1 < n else 0
    if off == 0:
        return lo_part
    return (lo_part >> off) | (hi_part << (64 - off))


# ------------------------------------------------- dyadic sample builder

cdef mp_size_t build_uniform(mp_limb_t *a, int bits, uint64_t base, uint64_t *j) nogil:
    """Uniform odd numerator: bits-1 random bits shifted up, low bit set."""
    cdef int nb = bits - 1
    cdef int words = (nb + 63) >> 6
    cdef int rem = nb & 63
    cdef int w
    cdef uint64_t carry, cur
    memset(a, 0, MAXL * sizeof(mp_limb_t))
    for w in range(words):
        a[w] = raw64(base, j[0])
        j[0] += 1
    if rem:
        a[words - 1] &= (<uint64_t>1 << rem) - 1
    carry = 0
    for w in range(words + 1):
        cur = a[w]
        a[w] = (cur << 1) | carry
        carry = cur >> 63
    a[0] |= 1
    return normalize(a, words + 1)


cdef mp_size_t build_endpoint(mp_limb_t *a, int bits, int comp, int shape,
                              uint64_t base, uint64_t *j) nogil:
    """Exact odd numerator for the Gamma-endpoint components; returns 0 for
    a draw collapsing to the boundary (rejected as singular)."""
    cdef double u = 0.0
    cdef double xr, fr
    cdef int t, ex, e_bits, sh, words, rem, w, idx, off
    cdef uint64_t m0, word
    for t in range(shape):
        u -= log(uniform53(base, j[0]))
        j[0] += 1
    xr = exp(-u) if comp == 0 else -expm1(-u)
    if not (0.0 < xr < 1.0):
        return 0
    fr = frexp(xr, &ex)
    m0 = <uint64_t>(fr * TWO53)
    e_bits = 53 - ex
    if e_bits > bits:
        return 0
    sh = bits - e_bits
    memset(a, 0, MAXL * sizeof(mp_limb_t))
    idx = sh >> 6
    off = sh & 63
    a[idx] |= m0 << off
    if off:
        a[idx + 1] |= m0 >> (64 - off)
    words = (sh + 63) >> 6
    rem = sh & 63
    for w in range(words):
        word = raw64(base, j[0])
        j[0] += 1
        if w == words - 1 and rem:
            word &= (<uint64_t>1 << rem) - 1
        a[w] |= word
    a[0] |= 1
    return normalize(a, ((sh + 53) + 63) >> 6)


# ------------------------------------------------- orbit-based integrands

cdef double trunc_sum(mp_limb_t *pa, mp_size_t na, mp_limb_t *pb, mp_size_t nb,
                      mp_limb_t *pr, mp_limb_t *pq, int bits, int n) nogil:
    """Alternating transfer-power sum through order n; consumes the buffers."""
    cdef double lg_a = lg_limbs(pa, na)
    cdef double lg_b, total = 0.0, sign = 1.0
    cdef mp_limb_t *tmp
    cdef mp_size_t nr, ntmp
    cdef int nu
    for nu in range(n + 1):
        if nb == 1 and pb[0] == 0:
            break
        lg_b = lg_limbs(pb, nb)
        total += sign * ratio2_limbs(pa, na, bits) * (lg_a - lg_b)
        sign = -sign
        mpn_tdiv_qr(pq, pr, 0, pa, na, pb, nb)
        nr = normalize(pr, nb)
        tmp = pa; pa = pb; pb = pr; pr = tmp
        ntmp = na; na = nb; nb = nr
        lg_a = lg_b
    return total


cdef double wilton_sum(mp_limb_t *pa, mp_size_t na, mp_limb_t *pb, mp_size_t nb,
                       mp_limb_t *pr, mp_limb_t *pq, int bits, double tol) nogil:
    """Tolerance-stopped alternating sum; consumes the buffers."""
    cdef double lg_a = lg_limbs(pa, na)
    cdef double lg_b, gamma, beta, total = 0.0, sign = 1.0
    cdef mp_limb_t *tmp
    cdef mp_size_t nr, ntmp
    while not (nb == 1 and pb[0] == 0):
        lg_b = lg_limbs(pb, nb)
        gamma = ratio2_limbs(pa, na, bits) * (lg_a - lg_b)
        total += sign * gamma
        sign = -sign
        beta = ratio2_limbs(pb, nb, bits)
        if gamma < tol and beta < tol:
            break
        mpn_tdiv_qr(pq, pr, 0, pa, na, pb, nb)
        nr = normalize(pr, nb)
        tmp = pa; pa = pb; pb = pr; pr = tmp
        ntmp = na; na = nb; nb = nr
        lg_a = lg_b
    return total


# ------------------------------------------------- reciprocal tables for g

cdef double *g_tab1 = NULL
cdef double *g_tab2 = NULL
cdef long g_tab_n = 0


def _ensure_tables(long n):
    global g_tab1, g_tab2, g_tab_n
    cdef long l
    cdef double *t1
    cdef double *t2
    if n <= g_tab_n:
        return
    t1 = <double *>malloc((n + 1) * sizeof(double))
    t2 = <double *>malloc((n + 1) * sizeof(double))
    if t1 == NULL or t2 == NULL:
        if t1 != NULL:
            free(t1)
        if t2 != NULL:
            free(t2)
        raise MemoryError
    t1[0] = 0.0
    t2[0] = 0.0
    for l in range(1, n + 1):
        t1[l] = 1.0 / l
        t2[l] = ldexp(2.0, -64) / l
    if g_tab1 != NULL:
        free(g_tab1)
    if g_tab2 != NULL:
        free(g_tab2)
    g_tab1 = t1
    g_tab2 = t2
    g_tab_n = n


def g_partial_pair(m96, long n1, long n2):
    """Partial sums at truncations n1 and n2 (n2 = 0 skips the second) for
    x given by its top 96 fractional bits."""
    cdef uint64_t hi = <uint64_t>(int(m96) >> 64)
    cdef uint64_t lo = <uint64_t>(int(m96) & 0xFFFFFFFFFFFFFFFF)
    cdef double s1 = 0.0, s2 = 0.0
    _ensure_tables(max(n1, n2))
    with nogil:
        wl_g_sums(hi, lo, n1, n2, g_tab1, g_tab2, &s1, &s2)
    return s1, s2


# ------------------------------------------------- public block kernels

def moment_block(int kind, int k, int n, long g_terms, bint g_avg, double tol,
                 int measure, int bits, uint64_t seed, uint64_t stream,
                 uint64_t i0, uint64_t i1, double wl, double wr, double wu,
                 double[::1] out, uint8_t[::1] flags):
    """Weighted integrand values; see _purekern.moment_block."""
    if bits < 64 or bits > 2048:
        raise ValueError("bits must be in [64, 2048]")
    if kind == KIND_G:
        _ensure_tables(2 * g_terms if g_avg else g_terms)
    cdef int shape = 2 * k + 1
    cdef double gnorm = 1.0
    cdef int t
    for t in range(2, 2 * k + 1):
        gnorm *= t
    cdef double two_k = 2.0 * k
    cdef mp_limb_t bufM[MAXL]
    cdef mp_limb_t bufP2[MAXL]
    cdef mp_limb_t bufTM[MAXL]
    cdef mp_limb_t bufR[MAXL]
    cdef mp_limb_t bufQ[MAXL]
    cdef mp_size_t nm, np2, ntm, nr
    cdef uint64_t idx, base, j
    cdef uint64_t pos
    cdef int comp, start96
    cdef double c, xd, onemxd, lx, l1mx, plx, pl1, q, pt, f_pow, v
    cdef double gs1 = 0.0, gs2 = 0.0, gval
    cdef uint64_t m96_hi, m96_lo
    cdef int sh96
    with nogil:
        for idx in range(i0, i1):
            pos = idx - i0
            base = stream_base(seed, stream, idx)
            c = uniform53(base, 0)
            j = 1
            comp = 0 if c < wl else (1 if c < wl + wr else 2)
            if comp == 2:
                nm = build_uniform(bufM, bits, base, &j)
            else:
                nm = build_endpoint(bufM, bits, comp, shape, base, &j)
                if nm == 0:
                    out[pos] = 0.0
                    flags[pos] = FLAG_SINGULAR
                    continue
            np2 = set_pow2(bufP2, bits)
            mpn_sub(bufTM, bufP2, np2, bufM, nm)
            ntm = normalize(bufTM, np2)
            xd = ratio2_limbs(bufM, nm, bits)
            onemxd = ratio2_limbs(bufTM, ntm, bits)
            lx = -log(xd) if xd < 0.5 else -log1p(-onemxd)
            l1mx = -log(onemxd) if onemxd < 0.5 else -log1p(-xd)
            plx = cpow(lx, two_k)
            pl1 = cpow(l1mx, two_k)
            q = (wl * plx + wr * pl1) / gnorm + wu
            pt = 1.0 if measure == MEASURE_LEBESGUE else 1.0 / ((1.0 + xd) * LN2)
            if kind == KIND_LOG:
                f_pow = plx
            elif kind == KIND_TRUNC:
                f_pow = cpow(fabs(trunc_sum(bufP2, np2, bufM, nm, bufR, bufQ, bits, n)), two_k)
            elif kind == KIND_G:
                if bits >= 96:
                    start96 = bits - 96
                    m96_lo = extract_bits(bufM, nm, start96)
                    m96_hi = extract_bits(bufM, nm, start96 + 64) & 0xFFFFFFFF
                else:
                    sh96 = 96 - bits
                    m96_lo = bufM[0] << sh96
                    m96_hi = extract_bits(bufM, nm, 64 - sh96) & 0xFFFFFFFF
                wl_g_sums(m96_hi, m96_lo, g_terms,
                          2 * g_terms if g_avg else 0, g_tab1, g_tab2, &gs1, &gs2)
                gval = 0.5 * (gs1 + gs2) if g_avg else gs1
                f_pow = cpow(fabs(gval), two_k)
            else:
                f_pow = cpow(fabs(wilton_sum(bufP2, np2, bufM, nm, bufR, bufQ, bits, tol)), two_k)
            v = f_pow * pt / q
            if isfinite(v):
                out[pos] = v
                flags[pos] = FLAG_OK
            else:
                out[pos] = 0.0
                flags[pos] = FLAG_NONFINITE


def transfer_block(int bits, uint64_t seed, uint64_t stream,
                   uint64_t i0, uint64_t i1, int nmax,
                   double[:, ::1] out_t, double[::1] out_x):
    """Transfer powers at uniform odd dyadic samples; see _purekern."""
    if bits < 64 or bits > 2048:
        raise ValueError("bits must be in [64, 2048]")
    cdef mp_limb_t bufA[MAXL]
    cdef mp_limb_t bufB[MAXL]
    cdef mp_limb_t bufR[MAXL]
    cdef mp_limb_t bufQ[MAXL]
    cdef mp_limb_t *pa
    cdef mp_limb_t *pb
    cdef mp_limb_t *pr
    cdef mp_limb_t *tmp
    cdef mp_size_t na, nb, nr, ntmp
    cdef uint64_t idx, base, j, pos
    cdef int nu, fill
    cdef double lg_a, lg_b
    with nogil:
        for idx in range(i0, i1):
            pos = idx - i0
            base = stream_base(seed, stream, idx)
            j = 0
            nb = build_uniform(bufB, bits, base, &j)
            na = set_pow2(bufA, bits)
            out_x[pos] = ratio2_limbs(bufB, nb, bits)
            pa = bufA
            pb = bufB
            pr = bufR
            lg_a = lg_limbs(pa, na)
            for nu in range(nmax + 1):
                if nb == 1 and pb[0] == 0:
                    for fill in range(nu, nmax + 1):
                        out_t[pos, fill] = 0.0
                    break
                lg_b = lg_limbs(pb, nb)
                out_t[pos, nu] = ratio2_limbs(pa, na, bits) * (lg_a - lg_b)
                mpn_tdiv_qr(bufQ, pr, 0, pa, na, pb, nb)
                nr = normalize(pr, nb)
                tmp = pa; pa = pb; pb = pr; pr = tmp
                ntmp = na; na = nb; nb = nr
                lg_a = lg_b


def c0_block(b_in, rs_in):
    """Cotangent sums c0(r/b) for an array of residues; folded half-range
    form, cot as cos/sin with the argument reduced to (0, 1/2]."""
    cdef uint64_t b = <uint64_t>int(b_in)
    rs_arr = np.ascontiguousarray(rs_in, dtype=np.uint64)
    out_arr = np.empty(len(rs_arr), dtype=np.float64)
    cdef uint64_t[::1] rs = rs_arr
    cdef double[::1] out = out_arr
    cdef Py_ssize_t i, nrs = len(rs_arr)
    cdef uint64_t r, tpos, m, half
    cdef double s, coef, ang, cotv, mm, twoinvb, scale
    half = (b - 1) >> 1
    twoinvb = 2.0 / <double>b
    scale = 3.14159265358979323846 / <double>b
    with nogil:
        for i in range(nrs):
            r = rs[i] % b
            tpos = 0
            s = 0.0
            mm = 0.0
            for m in range(1, half + 1):
                tpos += r
                if tpos >= b:
                    tpos -= b
                mm += 1.0
                coef = 1.0 - mm * twoinvb
                if 2 * tpos < b:
                    ang = scale * <double>tpos
                    cotv = cos(ang) / sin(ang)
                else:
                    ang = scale * <double>(b - tpos)
                    cotv = -(cos(ang) / sin(ang))
                s += coef * cotv
            out[i] = s
    return out_arr

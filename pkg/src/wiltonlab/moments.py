"""Measure toolkit and Monte Carlo moment estimation.

The invariant measure with density 1/((1+x) log 2) is handled in closed
form; its integrals are estimated as Lebesgue integrals of f * density, so
a single sampler serves both measures.  Even moments of the log-reciprocal,
the truncated operator sum, the sawtooth series, and the Wilton value are
estimated by importance sampling with a three-part proposal:

  * left endpoint  x = exp(-u), u ~ Gamma(2k+1):  density l(x)^(2k) / (2k)!
    which makes the dominant x -> 0 mass of l(x)^(2k) exactly flat;
  * right endpoint x = 1 - exp(-u), same law mirrored, covering x -> 1
    where the truncated sum behaves like -log(1/alpha_1);
  * uniform, floor for the middle.

Weighted values are target_density/proposal_density * f^(2k) per sample;
the estimate is their plain mean (both target measures are normalized), and
stderr comes from the sample variance.  Samples hitting an exact endpoint
are rejected and counted, never silently dropped.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.special import gammainc

from . import kernels, parallel

LN2 = math.log(2.0)
GOLDEN_CONJ = (math.sqrt(5.0) - 1.0) / 2.0

MEASURES = {"lebesgue": kernels.MEASURE_LEBESGUE, "gauss": kernels.MEASURE_GAUSS}

_KIND_CODES = {
    "l": kernels.KIND_LOG,
    "L": kernels.KIND_TRUNC,
    "g": kernels.KIND_G,
    "W": kernels.KIND_WILTON,
}


def gamma_int(L: int) -> float:
    """Gamma(L+1) = L! by exact integer factorial, for L within binary64
    range."""
    if L < 0:
        raise ValueError("L must be >= 0")
    if L > 170:
        raise OverflowError("L! exceeds binary64 range for L > 170")
    return float(math.factorial(L))


def tail_log_moment(x0: float, L: int) -> float:
    """Integral of log(1/x)^L over (x0, 1): the lower incomplete gamma
    gamma(L+1, log(1/x0))."""
    if not 0.0 < x0 < 1.0:
        raise ValueError("x0 must be in (0, 1)")
    return float(gammainc(L + 1, math.log(1.0 / x0))) * gamma_int(L)


def gauss_density(x: float) -> float:
    return 1.0 / ((1.0 + x) * LN2)


def measure_interval(a: float, b: float) -> float:
    """Invariant measure of (a, b): log((1+b)/(1+a)) / log 2."""
    if not 0.0 <= a < b <= 1.0:
        raise ValueError("need 0 <= a < b <= 1")
    return (math.log1p(b) - math.log1p(a)) / LN2


def invariance_residual(a: float, b: float, branch_cutoff: int = 1_000_000) -> float:
    """|m((a,b)) - m(preimage of (a,b))| where the preimage under x -> {1/x}
    is the disjoint union of branches (1/(n+b), 1/(n+a)).

    Branches up to the cutoff are summed term by term; the remainder
    telescopes to the closed form log((M+1+b)/(M+1+a)) / log 2, which is
    added exactly, so the residual is pure rounding noise.
    """
    if not 0.0 <= a < b <= 1.0:
        raise ValueError("need 0 <= a < b <= 1")
    if branch_cutoff < 1:
        raise ValueError("branch_cutoff must be >= 1")
    total = 0.0
    block = 1 << 20
    for lo in range(1, branch_cutoff + 1, block):
        hi = min(lo + block - 1, branch_cutoff)
        ns = np.arange(lo, hi + 1, dtype=np.float64)
        total += float(np.sum(np.log1p(1.0 / (ns + a)) - np.log1p(1.0 / (ns + b))))
    tail = math.log1p((b - a) / (branch_cutoff + 1.0 + a))
    return abs(measure_interval(a, b) - (total + tail) / LN2)


@dataclass(frozen=True, slots=True)
class IntegrandRef:
    """Reference to one of the supported integrands.

    kind: "l" (log-reciprocal), "L" (truncated operator sum of order n),
    "g" (sawtooth series with g_terms / g_average), "W" (Wilton value with
    stopping tolerance tol).
    """

    kind: str
    n: int = 24
    g_terms: int = 100_000
    g_average: bool = False
    tol: float = 1e-12

    def __post_init__(self):
        if self.kind not in _KIND_CODES:
            raise ValueError(f"unknown integrand kind {self.kind!r}")
        if self.n < 0 or self.g_terms < 1 or self.tol <= 0:
            raise ValueError("invalid integrand parameters")

    @property
    def label(self) -> str:
        if self.kind == "L":
            return f"L{self.n}"
        if self.kind == "g":
            suffix = "avg" if self.g_average else ""
            return f"g{self.g_terms}{suffix}"
        return self.kind


@dataclass(frozen=True, slots=True)
class ProposalMix:
    """Mixture weights of the importance-sampling proposal; shape is the
    Gamma shape 2k+1 of the endpoint components."""

    w_left: float = 0.4
    w_right: float = 0.4
    w_uniform: float = 0.2
    shape: int = 3

    def __post_init__(self):
        ws = (self.w_left, self.w_right, self.w_uniform)
        if min(ws) < 0.0 or abs(sum(ws) - 1.0) > 1e-12:
            raise ValueError("weights must be nonnegative and sum to 1")
        if self.shape < 1:
            raise ValueError("shape must be >= 1")

    @classmethod
    def for_k(cls, k: int) -> "ProposalMix":
        return cls(shape=2 * k + 1)

    @classmethod
    def pure_left(cls, k: int) -> "ProposalMix":
        return cls(w_left=1.0, w_right=0.0, w_uniform=0.0, shape=2 * k + 1)


@dataclass(frozen=True, slots=True)
class MomentEstimate:
    k: int
    measure: str
    value: float
    stderr: float
    samples: int
    seed: int
    ratio_to_2gamma: float
    integrand: str = ""
    rejected: int = 0
    warning: bool = False


def weighted_values(
    f: IntegrandRef,
    k: int,
    measure: str = "lebesgue",
    samples: int = 1000,
    seed: int = 1,
    proposal: ProposalMix | None = None,
    bits: int = 256,
    stream: int = 0,
    threads: int | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Per-sample weighted integrand values and status flags (0 ok,
    1 singular hit, 2 non-finite)."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if samples < 1000:
        raise ValueError("samples must be >= 1000")
    if measure not in MEASURES:
        raise ValueError(f"unknown measure {measure!r}")
    if bits < 64:
        raise ValueError("bits must be >= 64")
    if proposal is None:
        proposal = ProposalMix.for_k(k)
    if proposal.shape != 2 * k + 1:
        raise ValueError("proposal shape must equal 2k+1")
    out = np.zeros(samples, dtype=np.float64)
    flags = np.zeros(samples, dtype=np.uint8)

    def chunk(i0: int, i1: int) -> None:
        kernels.moment_block(
            _KIND_CODES[f.kind], k, f.n, f.g_terms, f.g_average, f.tol,
            MEASURES[measure], bits, seed, stream, i0, i1,
            proposal.w_left, proposal.w_right, proposal.w_uniform,
            out[i0:i1], flags[i0:i1],
        )

    parallel.map_chunks(samples, chunk, threads=threads)
    return out, flags


def moment_estimate(
    f: IntegrandRef,
    k: int,
    measure: str = "lebesgue",
    samples: int = 1_000_000,
    seed: int = 1,
    proposal: ProposalMix | None = None,
    bits: int = 256,
    stream: int = 0,
    threads: int | None = None,
) -> MomentEstimate:
    """Importance-sampled estimate of the 2k-th moment of the integrand
    under the Lebesgue or invariant measure."""
    values, flags = weighted_values(
        f, k, measure, samples, seed, proposal, bits, stream, threads
    )
    ok = flags == kernels.FLAG_OK
    n_ok = int(np.sum(ok))
    rejected = samples - n_ok
    warn = rejected > 0.001 * samples
    if warn:
        warnings.warn(
            f"rejection rate {rejected}/{samples} exceeds 0.1%", RuntimeWarning,
            stacklevel=2,
        )
    if n_ok == 0:
        raise ArithmeticError("every sample was rejected")
    mean = float(np.sum(values)) / n_ok  # rejected entries hold 0.0
    centered = np.where(ok, values - mean, 0.0)
    var = float(np.sum(centered * centered))
    stderr = math.sqrt(var / (n_ok * max(n_ok - 1, 1)))
    return MomentEstimate(
        k=k,
        measure=measure,
        value=mean,
        stderr=stderr,
        samples=samples,
        seed=seed,
        ratio_to_2gamma=mean / (2.0 * gamma_int(2 * k)),
        integrand=f.label,
        rejected=rejected,
        warning=warn,
    )


def moment_table(
    f: IntegrandRef,
    ks: list[int],
    measure: str = "lebesgue",
    samples: int = 1_000_000,
    seed: int = 1,
    bits: int = 256,
    threads: int | None = None,
) -> list[MomentEstimate]:
    """One estimate per k; each k runs on its own substream (stream = k) of
    the shared seed, so the table is deterministic under (seed, samples)."""
    if not ks:
        raise ValueError("ks must be nonempty")
    if any(k < 1 for k in ks):
        raise ValueError("every k must be >= 1")
    return [
        moment_estimate(
            f, k, measure=measure, samples=samples, seed=seed,
            proposal=ProposalMix.for_k(k), bits=bits, stream=k, threads=threads,
        )
        for k in ks
    ]


def transfer_samples(
    samples: int,
    nmax: int,
    seed: int = 1,
    bits: int = 256,
    stream: int = 0,
    threads: int | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Matrix of transfer powers (T^nu l)(x_i), nu = 0..nmax, plus the
    sampled points as doubles, for uniform odd dyadic samples."""
    if samples < 1 or nmax < 0:
        raise ValueError("need samples >= 1 and nmax >= 0")
    out_t = np.zeros((samples, nmax + 1), dtype=np.float64)
    out_x = np.zeros(samples, dtype=np.float64)

    def chunk(i0: int, i1: int) -> None:
        kernels.transfer_block(bits, seed, stream, i0, i1, nmax, out_t[i0:i1], out_x[i0:i1])

    parallel.map_chunks(samples, chunk, threads=threads)
    return out_t, out_x


class ContractionResult(NamedTuple):
    lhs: float
    rhs: float
    lhs_stderr: float
    rhs_stderr: float

    @property
    def combined_rel_stderr(self) -> float:
        return math.hypot(self.lhs_stderr / self.lhs, self.rhs_stderr / self.rhs)

    def holds(self, slack: float = 5.0) -> bool:
        return self.lhs <= self.rhs * (1.0 + slack * self.combined_rel_stderr)


def _mean_stderr(v: np.ndarray) -> tuple[float, float]:
    n = len(v)
    mean = float(np.sum(v)) / n
    var = float(np.sum((v - mean) ** 2)) / (n * max(n - 1, 1))
    return mean, math.sqrt(var)


def contraction_from_samples(
    t_mat: np.ndarray, xs: np.ndarray, p: float, n: int
) -> ContractionResult:
    w = 1.0 / ((1.0 + xs) * LN2)
    lhs_vals = w * np.abs(t_mat[:, n]) ** p
    rhs_vals = w * t_mat[:, 0] ** p
    lhs, lhs_se = _mean_stderr(lhs_vals)
    factor = GOLDEN_CONJ ** ((n - 1) * p)
    rhs, rhs_se = _mean_stderr(rhs_vals)
    return ContractionResult(lhs, factor * rhs, lhs_se, factor * rhs_se)


def contraction_check(
    p: float,
    n: int,
    samples: int = 100_000,
    seed: int = 1,
    bits: int = 256,
    stream: int = 0,
    threads: int | None = None,
) -> ContractionResult:
    """Monte Carlo check of the operator contraction: the invariant-measure
    integral of |T^n l|^p against ((sqrt5-1)/2)^((n-1)p) times that of l^p."""
    if p <= 1.0 or n < 1:
        raise ValueError("need p > 1 and n >= 1")
    t_mat, xs = transfer_samples(samples, n, seed=seed, bits=bits, stream=stream, threads=threads)
    return contraction_from_samples(t_mat, xs, p, n)


class ExceptionalResult(NamedTuple):
    empirical: float
    bound: float
    stderr: float

    def holds(self, slack: float = 5.0) -> bool:
        return self.empirical <= self.bound + slack * self.stderr


def exceptional_bound(d: int, h: int, u: float, v: float) -> float:
    """Closed-form tail bound for the set where T^d l >= u and
    T^(d+h) l >= v."""
    return 2.0 * math.exp(-(2.0 ** ((h - 2) / 2.0)) * v * math.exp(2.0 ** ((d - 2) / 2.0) * u))


def exceptional_from_samples(
    t_mat: np.ndarray, xs: np.ndarray, d: int, h: int, u: float, v: float
) -> ExceptionalResult:
    w = 1.0 / ((1.0 + xs) * LN2)
    ind = (t_mat[:, d] >= u) & (t_mat[:, d + h] >= v)
    vals = np.where(ind, w, 0.0)
    emp, se = _mean_stderr(vals)
    return ExceptionalResult(emp, exceptional_bound(d, h, u, v), se)


def exceptional_measure(
    d: int,
    h: int,
    u: float,
    v: float,
    samples: int = 1_000_000,
    seed: int = 1,
    bits: int = 256,
    stream: int = 0,
    threads: int | None = None,
) -> ExceptionalResult:
    """Empirical invariant measure of {T^d l >= u, T^(d+h) l >= v} against
    its closed-form bound."""
    if d < 0 or h < 1 or u <= 0 or v <= 0:
        raise ValueError("need d >= 0, h >= 1, u > 0, v > 0")
    t_mat, xs = transfer_samples(samples, d + h, seed=seed, bits=bits, stream=stream, threads=threads)
    return exceptional_from_samples(t_mat, xs, d, h, u, v)

"""wiltonlab: continued-fraction and transfer-operator numerics.

Exact big-integer Gauss-map orbits, Wilton's alternating series, cotangent
sums and their normalized moments, and deterministic importance-sampled
moment estimation, with a compiled kernel core and a pure-Python fallback.
"""

from .cf import (
    CFExpansion,
    ExactPoint,
    GaussOrbit,
    cf_expand,
    gauss_map,
    log_of_rational,
    orbit,
    parse_point,
    sample_point,
)
from .cotangent import (
    CotangentMomentRun,
    RadiusProfile,
    c0_sum,
    cotangent_moments,
    euler_phi,
    hk_cotangent,
    radius_profile,
)
from .kernels import BACKEND
from .moments import (
    IntegrandRef,
    MomentEstimate,
    ProposalMix,
    contraction_check,
    exceptional_measure,
    gamma_int,
    invariance_residual,
    measure_interval,
    moment_estimate,
    moment_table,
    tail_log_moment,
)
from .wilton import (
    WiltonValue,
    eq3_residual,
    functional_eq_residual,
    g_minus_wilton,
    g_series,
    gamma_terms,
    transfer_pow_l,
    truncated_wilton,
    wilton_eval,
)

__version__ = "0.1.0"

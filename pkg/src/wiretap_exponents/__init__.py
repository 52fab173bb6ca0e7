"""Secrecy and reliability exponents of the wire-tap channel under i.i.d. random coding."""

__version__ = "0.1.0"

from .exponents import (  # noqa: E402
    ExponentCurve,
    ExponentResult,
    corollary_exponent_pair,
    e1_e2,
    eb_closed_form,
    et,
    f0,
    g0,
    gallager_e0,
    gallager_er,
    secrecy_exponent,
    secrecy_exponent_min_form,
    secrecy_sweep,
)
from .prob_core import (  # noqa: E402
    Channel,
    Distribution,
    JointXZ,
    WiretapInstance,
    compose_prefix,
    kl_divergence,
    mutual_information,
    output_marginal,
)

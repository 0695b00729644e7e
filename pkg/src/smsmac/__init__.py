"""Secure modulo-sum computation over multiple access channels.

Finite-field code construction (:mod:`smsmac.gf`), channel models
(:mod:`smsmac.channel`), information quantities (:mod:`smsmac.infoq`),
the three-term lower bound (:mod:`smsmac.bound`) and a desk-scale protocol
simulator (:mod:`smsmac.simproto`).  All information values are in nats.
"""

from .bound import (
    BoundReport,
    asymptotic_limit,
    fig2_curve,
    fig2_value,
    general_bound,
    general_iw,
    leakage_exponent,
    max_feasible_message_rate,
    rate_conditions_check,
    theorem1_capacity,
    theorem2_bound,
)
from .channel import (
    AdditiveSymmetricMac,
    ComplexGaussianMac,
    DiscreteMac,
    RealGaussianMac,
    Var,
    is_symmetric,
    output_mixture,
)
from .gf import CodePair, FieldElement, FieldMatrix, FieldVector, make_code_pair, sample_invertible
from .infoq import conditional_mi, renyi_cmi, renyi_cmi_down
from .mixture import GaussianMixture, InfoEstimate, mixture_entropy
from .simproto import ProtocolConfig, SimResult, run_experiment

__all__ = [
    "AdditiveSymmetricMac", "BoundReport", "CodePair", "ComplexGaussianMac", "DiscreteMac",
    "FieldElement", "FieldMatrix", "FieldVector", "GaussianMixture", "InfoEstimate",
    "ProtocolConfig", "RealGaussianMac", "SimResult", "Var", "asymptotic_limit",
    "conditional_mi", "fig2_curve", "fig2_value", "general_bound", "general_iw", "is_symmetric",
    "leakage_exponent", "make_code_pair", "max_feasible_message_rate", "mixture_entropy",
    "output_mixture", "rate_conditions_check", "renyi_cmi", "renyi_cmi_down", "run_experiment",
    "sample_invertible", "theorem1_capacity", "theorem2_bound",
]

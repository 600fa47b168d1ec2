"""Markov chain order estimation with AIC, BIC, EDC and the GDL estimator."""

__version__ = "0.1.0"

from chainorder.chisq import chi2_cdf, chi2_survival
from chainorder.counts import (
    CountTable,
    SymbolSequence,
    build_counts,
    next_distribution,
    sandwich_joint,
)
from chainorder.errors import InfeasibleError, InputError
from chainorder.gdl import GdlProfile, decode_order, delta2, gdl_profile
from chainorder.generator import MTDSpec, TransitionTensor, build_tensor, sample_chain
from chainorder.likelihood import CriterionCurve, criteria, estimate_order, log_likelihood

__all__ = [
    "CountTable",
    "CriterionCurve",
    "GdlProfile",
    "InfeasibleError",
    "InputError",
    "MTDSpec",
    "SymbolSequence",
    "TransitionTensor",
    "build_counts",
    "build_tensor",
    "chi2_cdf",
    "chi2_survival",
    "criteria",
    "decode_order",
    "delta2",
    "estimate_order",
    "gdl_profile",
    "log_likelihood",
    "next_distribution",
    "sample_chain",
    "sandwich_joint",
]

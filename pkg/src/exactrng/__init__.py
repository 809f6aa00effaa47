"""Exact generation of one random process from another by interval refinement,
with exact stopping-time analysis, overflow bounds and a seeded simulator."""

from .exactnum import DyadicExp, Ratio, Real, UnitInterval, ratio
from .process import IID, ConfigError, FiniteMixture, Markov, NamedBernoulli, load_model, seq_prob
from .interval_alg import build_tree, generate
from .analysis import expected_stopping_time, fl_truncate, stopping_profile, validity_check

__version__ = "0.1.0"

__all__ = [
    "DyadicExp",
    "Ratio",
    "Real",
    "UnitInterval",
    "ratio",
    "IID",
    "ConfigError",
    "FiniteMixture",
    "Markov",
    "NamedBernoulli",
    "load_model",
    "seq_prob",
    "build_tree",
    "generate",
    "expected_stopping_time",
    "fl_truncate",
    "stopping_profile",
    "validity_check",
]

"""Exact lattice-sum distributions and local limit diagnostics."""

from .lattice import (
    LatticePmf,
    MomentSummary,
    bernoulli,
    centered_coin,
    char_fn,
    lazy_walk,
    maximal_span,
    moments,
    point_mass,
    power_tail,
    uniform_range,
)
from .exact import (
    JointCell,
    SumLawTable,
    joint_law,
    sum_law,
    sup_cdf_distance,
    weighted_sum_law,
)

__all__ = [
    "LatticePmf",
    "MomentSummary",
    "SumLawTable",
    "JointCell",
    "bernoulli",
    "centered_coin",
    "char_fn",
    "joint_law",
    "lazy_walk",
    "maximal_span",
    "moments",
    "point_mass",
    "power_tail",
    "sum_law",
    "sup_cdf_distance",
    "uniform_range",
    "weighted_sum_law",
]

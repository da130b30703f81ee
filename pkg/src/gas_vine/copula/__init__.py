"""
二元 Copula：族、连接函数、时变驱动与估计
"""

from .dynamics import (
    Driver,
    GasCoef,
    GasPath,
    PairDynamics,
    PattonCoef,
    StaticCoef,
    filter_pair,
    gas_filter,
    pair_loglik,
    patton_filter,
    static_filter,
)
from .estimation import fit_pair, select_family
from .families import (
    ALL_FAMILIES,
    CopulaParam,
    Family,
    PairKernel,
    h_function,
    h_inverse,
    kendall_tau,
    log_density,
    score,
    tau_to_param,
)
from .links import CORRELATION_LINK, GUMBEL_LINK, LinkFn

__all__ = [
    "ALL_FAMILIES",
    "CORRELATION_LINK",
    "GUMBEL_LINK",
    "CopulaParam",
    "Driver",
    "Family",
    "GasCoef",
    "GasPath",
    "LinkFn",
    "PairDynamics",
    "PairKernel",
    "PattonCoef",
    "StaticCoef",
    "filter_pair",
    "fit_pair",
    "gas_filter",
    "h_function",
    "h_inverse",
    "kendall_tau",
    "log_density",
    "pair_loglik",
    "patton_filter",
    "score",
    "select_family",
    "static_filter",
    "tau_to_param",
]

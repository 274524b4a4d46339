"""Step-2 rough-path arithmetic for enhanced martingales and Monte Carlo checks of BDG-type bounds."""

__version__ = "0.1.0"

from .errors import InputError, NumericError, RoughBDGError, UnsupportedConfigurationError
from .group import (
    SUM_L2,
    GroupElement,
    HomNorm,
    area2,
    dilate,
    distance,
    exp,
    hom_norm,
    identity,
    inverse,
    product,
)
from .cc import cc_geodesic, cc_norm, geodesic_spec
from .paths import (
    Dissection,
    GroupPath,
    concatenate,
    geodesic_approx,
    lift_piecewise_linear,
    path_dilate,
    piecewise_linear_approx,
    subsample,
    time_change,
)
from .variation import (
    discrete_q_variation,
    interpolation_bound_check,
    p_variation,
    p_variation_pruned,
    pvar_distance,
    sup_distance,
)
from .rng import RngSpec
from .stochastic import MartingaleFamily, MartingaleSample, bracket_total, refine, simulate

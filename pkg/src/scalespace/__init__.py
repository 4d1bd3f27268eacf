"""Bayesian scale-space analysis of reconstructed time series."""

from .credibility import (
    CredibilityMap,
    Label,
    build_map,
    joint_sign_selection,
    pointwise_sign_probs,
)
from .errors import ScaleSpaceError
from .model import (
    ModelConfig,
    PosteriorDraws,
    error_covariance,
    gibbs_sample,
    second_difference_operator,
)
from .scalespace import (
    DerivativeField,
    ScaleGrid,
    SmootherPair,
    local_linear_smoother,
    make_scale_grid,
    push_draws,
)
from .series_io import (
    PRESETS,
    SyntheticSpec,
    TimeSeries,
    generate_synthetic,
    parse_series,
    read_series,
    render_series,
)

__version__ = "0.1.0"

__all__ = [
    "CredibilityMap",
    "DerivativeField",
    "Label",
    "ModelConfig",
    "PRESETS",
    "PosteriorDraws",
    "ScaleGrid",
    "ScaleSpaceError",
    "SmootherPair",
    "SyntheticSpec",
    "TimeSeries",
    "build_map",
    "error_covariance",
    "generate_synthetic",
    "gibbs_sample",
    "joint_sign_selection",
    "local_linear_smoother",
    "make_scale_grid",
    "parse_series",
    "pointwise_sign_probs",
    "push_draws",
    "read_series",
    "render_series",
    "second_difference_operator",
]

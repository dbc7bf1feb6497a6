"""Holomorphic correspondences on the Riemann sphere."""

from ._corrdyn import (
    Cloud,
    ConfigError,
    Correspondence,
    DomainError,
    NumericError,
    backward_cloud,
    compose,
    critical_values,
    dual_lip_distance,
    forward_cloud,
    iterate,
    operator_norm_estimate,
    periodic_points,
)

__all__ = [
    "Cloud",
    "ConfigError",
    "Correspondence",
    "DomainError",
    "NumericError",
    "backward_cloud",
    "compose",
    "critical_values",
    "dual_lip_distance",
    "forward_cloud",
    "iterate",
    "operator_norm_estimate",
    "periodic_points",
]

"""Exact arithmetic, digit statistics and fractal constructions for the
expansion x = sum_i 2^-(d_1 + ... + d_i) with positive integer digits."""

__version__ = "0.1.0"

from .expansion import (  # noqa: E402
    Cylinder,
    PeriodicExpansion,
    apply_T,
    as_point,
    cylinder,
    digit_of,
    expand,
    expand_periodic,
    iter_digits,
    reconstruct,
)

__all__ = [
    "Cylinder",
    "PeriodicExpansion",
    "apply_T",
    "as_point",
    "cylinder",
    "digit_of",
    "expand",
    "expand_periodic",
    "iter_digits",
    "reconstruct",
]

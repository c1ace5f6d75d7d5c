"""Numerical laboratory for exotic bilinear paraproducts.

Exact dyadic combinatorics (intervals, lacunary sets, interval collections),
periodic discrete signals, bilinear Fourier multipliers with two independent
evaluation paths, r-variation norms, and adversarial norm estimation.
"""

__version__ = "0.1.0"

from ._accel import USE_NUMBA

__all__ = ["__version__", "USE_NUMBA"]

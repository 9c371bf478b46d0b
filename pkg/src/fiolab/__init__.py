"""Numerical laboratory for rough Fourier integral operators on periodic grids.

The package builds dyadic (Littlewood-Paley) and angular frequency
decompositions, evaluates oscillatory-integral operators and their kernels,
computes L^r maximal functions and sparse collections, and runs slope-fit
experiments against closed-form decay exponents.
"""

__version__ = "0.1.0"

from .grid import Grid, SampledFunction, DyadicCube, make_grid, forward_transform, inverse_transform, cube_average

__all__ = [
    "Grid",
    "SampledFunction",
    "DyadicCube",
    "make_grid",
    "forward_transform",
    "inverse_transform",
    "cube_average",
    "__version__",
]

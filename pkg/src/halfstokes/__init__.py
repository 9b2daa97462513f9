"""Half-space Stokes / Navier-Stokes solver built from boundary heat
potentials, with a discrete anisotropic Besov norm engine."""

__version__ = "0.1.0"

from .core import (BesovIndex, BoundaryField, HalfSpaceGrid, IterationTrace,
                   ScalarField, TensorField, VectorField, make_grid,
                   parabolic_scale)

__all__ = [
    "BesovIndex", "BoundaryField", "HalfSpaceGrid", "IterationTrace",
    "ScalarField", "TensorField", "VectorField", "make_grid",
    "parabolic_scale", "__version__",
]

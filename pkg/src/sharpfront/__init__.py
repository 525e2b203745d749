"""Numerical laboratory for sharp fronts of the generalised SQG family near the disk."""
from .dispersion import Alpha, build_table, c_alpha, l_alpha, omega
from .contour_rhs import GridFunction, QuadratureRule, SpectralField, grad_E, rhs_f, rhs_h

__all__ = ["Alpha", "build_table", "c_alpha", "l_alpha", "omega", "GridFunction",
           "QuadratureRule", "SpectralField", "grad_E", "rhs_f", "rhs_h"]
__version__ = "0.1.0"

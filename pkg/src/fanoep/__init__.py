"""Complex spectra of discrete levels coupled to a continuum with a band edge.

Exceptional points, Fano/bound-state-in-continuum loci and the order of the
time-symmetry-breaking transition, for one or two levels and a 1D (Van Hove)
or 3D continuum.
"""
from .model import Medium, ModelParams, NStates, PolarCoords, SymmetricCoords, to_symmetric, validate
from .selfenergy import SheetBranch, sigma_closed, sigma_quadrature
from .dispersion import (Category, ClassifiedRoot, DispersionPolynomial, Spectrum, build_dispersion,
                         classify_root, solve_roots, spectrum)

__version__ = "0.1.0"

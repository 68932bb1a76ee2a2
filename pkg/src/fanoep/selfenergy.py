"""Scalar self-energy of the continuum, closed form and by quadrature.

The closed forms are ``sigma_s(z) = c0 + s * c1 * z**eta`` with

* 1D (Van Hove edge): ``c0 = 1``,  ``c1 = -i pi/2``,   ``eta = -1/2``
* 3D:                 ``c0 = -pi``, ``c1 = -i pi^2/2``, ``eta = +1/2``

``sqrt(z)`` is taken on the physical sheet, i.e. with its cut along the
positive real axis (``Im sqrt(z) >= 0``).  ``SheetBranch.PLUS`` is then the
first Riemann sheet everywhere and ``SheetBranch.MINUS`` the second one.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .model import Medium

QUAD_ABS_TOL = 1e-10
QUAD_MAX_EVALS = 10**6
MIN_CUT_DISTANCE = 1e-6


class SheetBranch(enum.IntEnum):
    PLUS = 1
    MINUS = -1

    @property
    def label(self) -> str:
        return "plus" if self is SheetBranch.PLUS else "minus"


class QuadratureError(RuntimeError):
    pass


@dataclass(frozen=True)
class SigmaCoefficients:
    c0: float
    c1: complex
    eta: float


_COEFFS = {
    Medium.ONE_D: SigmaCoefficients(1.0, -0.5j * math.pi, -0.5),
    Medium.THREE_D: SigmaCoefficients(-math.pi, -0.5j * math.pi**2, 0.5),
}


def coefficients(medium=Medium.ONE_D) -> SigmaCoefficients:
    return _COEFFS[Medium(medium)]


def sheet_sqrt(z):
    """Square root with the cut on the positive real axis (``Im >= 0``)."""
    s = np.sqrt(np.asarray(z, dtype=complex))
    s = np.where(s.imag < 0, -s, s)
    return s[()] if s.ndim == 0 else s


def sigma_closed(z, branch=SheetBranch.PLUS, medium=Medium.ONE_D):
    """Closed-form self-energy on the requested branch.

    Parameters
    ----------
    z : complex or array of complex
        Energy; ``z = 0`` is the branch point and is rejected.
    branch : SheetBranch
        ``PLUS`` for the first (physical) sheet, ``MINUS`` for the continued one.
    medium : Medium

    Returns
    -------
    complex or ndarray
    """
    c = coefficients(medium)
    zz = np.asarray(z, dtype=complex)
    if np.any(zz == 0):
        raise ValueError("self-energy is singular at the branch point z = 0")
    root = sheet_sqrt(zz)
    power = 1.0 / root if c.eta < 0 else root
    out = c.c0 + int(SheetBranch(branch)) * c.c1 * power
    out = np.asarray(out)
    return complex(out) if out.ndim == 0 else out


def distance_to_band(z: complex) -> float:
    z = complex(z)
    if z.real < 0:
        return abs(z)
    if z.real > 1:
        return abs(z - 1)
    return abs(z.imag)


def sigma_quadrature(z: complex, medium=Medium.ONE_D, tol: float = QUAD_ABS_TOL) -> complex:
    """First-sheet self-energy from its defining k-integral (adaptive Gauss-Kronrod).

    1D: ``(1/2) int_{-1}^{1} dk / (z - k^2)``; 3D: ``pi int_0^1 k^2 dk / (z - k^2)``.
    """
    z = complex(z)
    if distance_to_band(z) <= MIN_CUT_DISTANCE:
        raise ValueError(f"z={z} lies on or too close to the continuum cut [0, 1]")
    medium = Medium(medium)
    if medium is Medium.ONE_D:
        # even integrand: (1/2) int_{-1}^{1} = int_0^1
        def weight(k):
            return 1.0
        prefactor = 1.0
    else:
        def weight(k):
            return k * k
        prefactor = math.pi

    def re(k):
        return (weight(k) / (z - k * k)).real

    def im(k):
        return (weight(k) / (z - k * k)).imag

    # put a breakpoint where the integrand peaks
    peak = math.sqrt(abs(z.real))
    points = [peak] if 0 < peak < 1 else None
    limit = QUAD_MAX_EVALS // 21
    parts = []
    for fn in (re, im):
        val, err, info = integrate.quad(fn, 0.0, 1.0, epsabs=tol, epsrel=0.0,
                                        limit=limit, points=points, full_output=1)[:3]
        if info["neval"] > QUAD_MAX_EVALS or err > max(tol, 1e-13 * abs(val)):
            raise QuadratureError(f"quadrature did not converge at z={z} (error estimate {err:.3g})")
        parts.append(val)
    return prefactor * complex(parts[0], parts[1])

"""2x2 effective Hamiltonians that reproduce the local eigenvalue structure,
and a check for Jordan-block (defective) form."""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .critical import ep_single_closed_form

GAP_TOL = 1e-8
OVERLAP_TOL = 1e-6


@dataclass(frozen=True)
class Matrix2:
    m11: complex
    m12: complex
    m21: complex
    m22: complex

    def __post_init__(self):
        for name in ("m11", "m12", "m21", "m22"):
            v = complex(getattr(self, name))
            if not (math.isfinite(v.real) and math.isfinite(v.imag)):
                raise ValueError(f"{name} is not finite")
            object.__setattr__(self, name, v)

    def as_array(self) -> np.ndarray:
        return np.array([[self.m11, self.m12], [self.m21, self.m22]], dtype=complex)

    @property
    def frobenius(self) -> float:
        return math.sqrt(sum(abs(v) ** 2 for v in (self.m11, self.m12, self.m21, self.m22)))


@dataclass(frozen=True)
class JordanReport:
    eigenvalues: Tuple[complex, complex]
    defective: bool
    eigenvector_overlap: float
    rank_deficiency_certificate: float
    scalar_degenerate: bool = False  # M = lambda I: degenerate yet diagonalizable


def _jordan_form(a: float, b: float, c: float) -> Matrix2:
    return Matrix2(a, 1.0, -b * b * c, a)


def build_2x2_single(eps_a: float, alpha: float = 0.1) -> Matrix2:
    """``[[a, 1], [-b^2 c, a]]`` with eigenvalues ``a +- i b sqrt(c)`` of the single-level EP."""
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    a = (eps_a + alpha**2) / 3
    b = (2 * math.pi * alpha**2) ** (1 / 3) / math.sqrt(3)
    c = eps_a - ep_single_closed_form(alpha).eps_a
    return _jordan_form(a, b, c)


def build_2x2_two(eps_A: float, eps_D: float, alpha: float = 0.1) -> Matrix2:
    """Same structure for the pair next to the BIC; defective at ``eps_A = 0``."""
    if eps_A < 0:
        raise ValueError("eps_A must be non-negative")
    den = alpha**2 * (math.pi**2 + 4 * eps_A)
    a = eps_A - 2 * eps_A * eps_D**2 / den
    b = math.pi * eps_D**2 / den
    return _jordan_form(a, b, eps_A)


def _smallest_singular(m11, m12, m21, m22) -> float:
    f2 = abs(m11) ** 2 + abs(m12) ** 2 + abs(m21) ** 2 + abs(m22) ** 2
    det = abs(m11 * m22 - m12 * m21)
    smax2 = 0.5 * (f2 + math.sqrt(max(f2 * f2 - 4 * det * det, 0.0)))
    return det / math.sqrt(smax2) if smax2 > 0 else 0.0


def analyze(m: Matrix2) -> JordanReport:
    """Eigenvalues, eigenvector overlap and a Jordan-block verdict for a 2x2 matrix.

    Eigenvectors are the non-zero columns of ``adj(M - lambda I)``.  The
    matrix is called defective when the eigenvalue gap is below
    ``1e-8 * scale`` and the normalised eigenvector overlap exceeds
    ``1 - 1e-6``.  A scalar matrix is degenerate but diagonalizable; its
    overlap is reported as 0 and ``scalar_degenerate`` is set.
    """
    half_tr = 0.5 * (m.m11 + m.m22)
    s = cmath.sqrt((0.5 * (m.m11 - m.m22)) ** 2 + m.m12 * m.m21)
    lam = (half_tr + s, half_tr - s)
    scale = max(1.0, m.frobenius)

    vecs = []
    for z in lam:
        cols = ((m.m22 - z, -m.m21), (-m.m12, m.m11 - z))
        v = max(cols, key=lambda col: abs(col[0]) ** 2 + abs(col[1]) ** 2)
        vecs.append(v)
    norms = [math.sqrt(abs(v[0]) ** 2 + abs(v[1]) ** 2) for v in vecs]
    scalar = min(norms) <= 1e-300 or (m.m12 == 0 and m.m21 == 0 and m.m11 == m.m22)
    if scalar:
        overlap = 0.0
    else:
        inner = vecs[0][0].conjugate() * vecs[1][0] + vecs[0][1].conjugate() * vecs[1][1]
        overlap = min(1.0, abs(inner) / (norms[0] * norms[1]))

    gap = abs(lam[0] - lam[1])
    defective = (not scalar) and gap < GAP_TOL * scale and overlap > 1 - OVERLAP_TOL
    cert = _smallest_singular(m.m11 - half_tr, m.m12, m.m21, m.m22 - half_tr) / (m.frobenius or 1.0)
    return JordanReport(lam, defective, overlap, cert, scalar)

"""Rationalised dispersion polynomials, their roots, and root classification.

Writing ``sigma = c0 + s c1 z**eta`` the 2x2 determinant
``det(H_eff(z) - z) = (z - e_a)(z - e_b) - sigma(z) R(z)`` becomes
``P(z) - s c1 z**eta R(z)`` with

    R(z) = alpha_a^2 (z - e_b) + alpha_b^2 (z - e_a)
    P(z) = (z - e_a)(z - e_b) - c0 R(z)

Squaring away the branch sign gives a real polynomial whose roots are the
eigenvalues on *both* sheets:

    1D (eta = -1/2):  z P^2 + |c1|^2 R^2
    3D (eta = +1/2):  P^2 + |c1|^2 z R^2

Each root is then assigned to the sheet on which the unsquared relation holds.
"""
from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field
from typing import List, NamedTuple, Optional, Sequence, Tuple

import mpmath
import numpy as np

from .model import Medium, ModelParams, require_valid
from .selfenergy import SheetBranch, coefficients, sigma_closed

log = logging.getLogger(__name__)

CLUSTER_RADIUS = 1e-9
# candidates for numerically unresolved multiple roots
NEAR_CLUSTER_RADIUS = 1e-6
DOUBLE_ROOT_DERIV_TOL = 1e-8
CLASSIFY_TOL = 1e-9
BRANCH_POINT_RADIUS = 1e-10
MAX_NEWTON_ITER = 500
_EPS = np.finfo(float).eps


class RootSolveError(RuntimeError):
    pass


class Provenance(str, enum.Enum):
    QUINTIC_1D_TWO_STATE = "Quintic1D_TwoState"
    CUBIC_1D_SINGLE = "Cubic1D_Single"
    QUARTIC_3D_TWO_STATE = "Quartic3D_TwoState"
    QUADRATIC_3D_SINGLE = "Quadratic3D_Single"
    QUARTIC_3D_RESCALED = "Quartic3D_Rescaled"
    GENERIC = "Generic"


class Category(str, enum.Enum):
    BOUND_FIRST_SHEET = "BoundFirstSheet"
    RESONANCE = "Resonance"
    ANTI_RESONANCE = "AntiResonance"
    REAL_SECOND_SHEET = "RealSecondSheet"
    DEGENERATE = "Degenerate"


# --------------------------------------------------------------------------
# coefficient-list arithmetic (ascending powers; works for float and mpf)

def _pmul(a, b):
    out = [0 * a[0]] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] = out[i + j] + x * y
    return out


def _padd(a, b):
    n = max(len(a), len(b))
    a = list(a) + [0 * a[0]] * (n - len(a))
    b = list(b) + [0 * b[0]] * (n - len(b))
    return [x + y for x, y in zip(a, b)]


def _pscale(a, s):
    return [s * x for x in a]


def _shift(a):
    """Multiply by z."""
    return [0 * a[0]] + list(a)


@dataclass(frozen=True)
class DispersionPolynomial:
    """Real polynomial, coefficients in ascending order (constant first).

    ``coeffs`` holds floats, or ``mpmath.mpf`` values when built with a
    working precision (``dps``).
    """

    coeffs: Tuple
    provenance: Provenance = Provenance.GENERIC
    dps: Optional[int] = None
    notes: Tuple[str, ...] = field(default=())

    def __post_init__(self):
        c = list(self.coeffs)
        while len(c) > 1 and c[-1] == 0:
            c.pop()
        if len(c) < 2:
            raise ValueError("polynomial must have degree >= 1")
        object.__setattr__(self, "coeffs", tuple(c))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def is_exact(self) -> bool:
        return self.dps is not None

    def as_array(self) -> np.ndarray:
        return np.array([float(c) for c in self.coeffs])

    def __call__(self, z):
        acc = 0 * self.coeffs[0]
        for c in reversed(self.coeffs):
            acc = acc * z + c
        return acc

    def derivative(self) -> "DispersionPolynomial":
        d = [k * c for k, c in enumerate(self.coeffs)][1:]
        return DispersionPolynomial(tuple(d), Provenance.GENERIC, self.dps)

    def scale_at(self, z) -> float:
        """sum_k |c_k| |z|^k: size of the terms summed when evaluating at ``z``."""
        r = abs(complex(z))
        return float(sum(abs(float(c)) * r**k for k, c in enumerate(self.coeffs)))


def _numbers(p: ModelParams, dps: Optional[int]):
    if dps is None:
        return float, math.pi
    mpmath.mp.dps = max(mpmath.mp.dps, dps)
    return mpmath.mpf, mpmath.pi


def _c0_c1sq(medium: Medium, pi):
    if medium is Medium.ONE_D:
        return 1, pi**2 / 4
    return -pi, pi**4 / 4


def build_dispersion(p: ModelParams, dps: Optional[int] = None) -> DispersionPolynomial:
    """Polynomial whose roots are all eigenvalues of ``H_eff`` on both sheets.

    With ``dps`` the coefficients are built in mpmath at that many digits,
    which keeps near-degenerate roots resolvable.
    """
    require_valid(p)
    num, pi = _numbers(p, dps)
    c0, c1sq = _c0_c1sq(p.medium, pi)
    ea, aa = num(p.eps_a), num(p.alpha_a)
    one = num(1)
    if p.is_single:
        R = [aa * aa]
        P = [-ea - c0 * aa * aa, one]
        prov = (Provenance.CUBIC_1D_SINGLE if p.medium is Medium.ONE_D
                else Provenance.QUADRATIC_3D_SINGLE)
    else:
        eb, ab = num(p.eps_b), num(p.alpha_b)
        a2, b2 = aa * aa, ab * ab
        R = [-(a2 * eb + b2 * ea), a2 + b2]
        P = [ea * eb - c0 * R[0], -(ea + eb) - c0 * R[1], one]
        prov = (Provenance.QUINTIC_1D_TWO_STATE if p.medium is Medium.ONE_D
                else Provenance.QUARTIC_3D_TWO_STATE)
    P2 = _pmul(P, P)
    R2 = _pscale(_pmul(R, R), c1sq)
    if p.medium is Medium.ONE_D:
        coeffs = _padd(_shift(P2), R2)
    else:
        coeffs = _padd(P2, _shift(R2))
    return DispersionPolynomial(tuple(coeffs), prov, dps)


def build_dispersion_3d_rescaled(p: ModelParams, dps: Optional[int] = None) -> DispersionPolynomial:
    """The two-state 3D quartic in the form
    ``{(z-eA)(z-eA+pi a^2) - eD^2}^2 + (pi^4 a^4/4) z (z-eA)^2``.

    It equals :func:`build_dispersion` evaluated at coupling ``alpha/sqrt(2)``;
    kept as a cross-check variant.  Needs equal couplings.
    """
    require_valid(p)
    if p.is_single or p.alpha_a != p.alpha_b:
        raise ValueError("rescaled 3D form is defined for two states with equal couplings")
    num, pi = _numbers(p, dps)
    ea, eb, a = num(p.eps_a), num(p.eps_b), num(p.alpha_a)
    eA, eD = (ea + eb) / 2, (ea - eb) / 2
    P = [eA * eA - pi * a * a * eA - eD * eD, -2 * eA + pi * a * a, num(1)]
    Q = [num(0), eA * eA, -2 * eA, num(1)]
    coeffs = _padd(_pmul(P, P), _pscale(Q, pi**4 * a**4 / 4))
    return DispersionPolynomial(tuple(coeffs), Provenance.QUARTIC_3D_RESCALED, dps,
                                notes=("coupling convention differs from substitution by alpha^2 -> alpha^2/2",))


# --------------------------------------------------------------------------
# root finding

class Root(NamedTuple):
    z: complex
    multiplicity: int


def _horner(c: np.ndarray, z: complex, order: int = 0) -> complex:
    """Evaluate the ``order``-th derivative of the ascending-coefficient polynomial."""
    if order:
        k = np.arange(len(c))
        fac = np.ones(len(c))
        for j in range(order):
            fac = fac * (k - j)
        c = (c * fac)[order:]
    acc = 0j
    for a in c[::-1]:
        acc = acc * z + a
    return acc


def _scale(c: np.ndarray, z: complex, order: int = 0) -> float:
    r = abs(z)
    k = np.arange(len(c))
    fac = np.ones(len(c))
    for j in range(order):
        fac = fac * (k - j)
    return float(np.sum(np.abs(c * fac)[order:] * r ** np.arange(len(c) - order)))


def _newton(c: np.ndarray, z: complex, order: int = 0) -> complex:
    """Polish a root of the ``order``-th derivative of ``c``."""
    best, best_f = z, abs(_horner(c, z, order))
    for _ in range(MAX_NEWTON_ITER):
        f = _horner(c, z, order)
        af = abs(f)
        if af < best_f:
            best, best_f = z, af
        if af <= 4 * _EPS * _scale(c, z, order):
            return z
        df = _horner(c, z, order + 1)
        if df == 0:
            break
        step = f / df
        z = z - step
        if abs(step) <= 2 * _EPS * max(abs(z), 1e-300):
            return z
    if best_f <= 1e3 * _EPS * _scale(c, best, order):
        return best
    raise RootSolveError(f"Newton polishing did not converge near z={best}")


def _merge_clusters(c: np.ndarray, roots: List[complex]) -> List[Root]:
    """Group roots lying closer than the cluster radii into multiple roots."""
    n = len(roots)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if abs(roots[i] - roots[j]) <= NEAR_CLUSTER_RADIUS * max(1.0, abs(roots[i])):
                parent[find(i)] = find(j)
    groups = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(roots[i])

    out = []
    for members in groups.values():
        k = len(members)
        if k == 1:
            out.append(Root(members[0], 1))
            continue
        centroid = sum(members) / k
        spread = max(abs(m - centroid) for m in members)
        if spread <= CLUSTER_RADIUS:
            out.append(Root(centroid, k))
            continue
        # a k-fold root is a simple root of the (k-1)-th derivative; accept the
        # merge only if the lower derivatives vanish there to rounding level
        try:
            zs = _newton(c, centroid, k - 1)
        except RootSolveError:
            zs = centroid
        ok = (abs(zs - centroid) <= 2 * spread + CLUSTER_RADIUS
              and abs(_horner(c, zs)) <= 64 * _EPS * _scale(c, zs))
        for order in range(1, k):
            ok = ok and abs(_horner(c, zs, order)) <= DOUBLE_ROOT_DERIV_TOL * _scale(c, zs, order)
        if ok:
            out.append(Root(zs, k))
        else:
            out.extend(Root(m, 1) for m in members)
    return out


def _conjugate_close(roots: List[Root], real_tol: float) -> List[Root]:
    """Make the root multiset exactly closed under conjugation."""
    reals, upper, lower = [], [], []
    for r in roots:
        z = complex(r.z)
        if abs(z.imag) <= real_tol * max(1.0, abs(z)):
            reals.append(Root(complex(z.real, 0.0), r.multiplicity))
        elif z.imag > 0:
            upper.append(Root(z, r.multiplicity))
        else:
            lower.append(Root(z, r.multiplicity))
    out = list(reals)
    lower = list(lower)
    for u in upper:
        if not lower:
            out.append(Root(complex(u.z.real, 0.0), u.multiplicity))
            continue
        j = min(range(len(lower)), key=lambda i: abs(lower[i].z - u.z.conjugate()))
        w = lower.pop(j)
        m = 0.5 * (u.z + w.z.conjugate())
        mult = min(u.multiplicity, w.multiplicity)
        out.append(Root(m, mult))
        out.append(Root(m.conjugate(), mult))
        extra = max(u.multiplicity, w.multiplicity) - mult
        if extra:
            out.append(Root(complex(m.real, 0.0), 2 * extra))
    for w in lower:
        out.append(Root(complex(w.z.real, 0.0), w.multiplicity))
    return out


def _sort_key(r: Root):
    return (round(r.z.real, 15), r.z.imag)


def solve_roots(poly: DispersionPolynomial) -> List[Root]:
    """All complex roots of ``poly`` with multiplicities.

    Float polynomials: companion-matrix eigenvalues, Newton polish on the
    original coefficients, cluster merging, conjugate pairing.  Polynomials
    built with ``dps`` are solved by mpmath at that precision.
    """
    if poly.is_exact:
        return _solve_exact(poly)
    c = poly.as_array()
    if poly.degree == 1:
        return [Root(complex(-c[0] / c[1], 0.0), 1)]
    monic = c / c[-1]
    guesses = np.polynomial.polynomial.polyroots(monic)
    polished = [_newton(monic, complex(g)) for g in guesses]
    merged = _merge_clusters(monic, polished)
    closed = _conjugate_close(merged, real_tol=1e-14)
    total = sum(r.multiplicity for r in closed)
    if total != poly.degree:
        raise RootSolveError(f"root count {total} != degree {poly.degree}")
    return sorted(closed, key=_sort_key)


def _solve_exact(poly: DispersionPolynomial) -> List[Root]:
    dps = poly.dps
    with mpmath.workdps(dps):
        desc = list(reversed(poly.coeffs))
        for steps, extra in ((200, 2 * dps), (2000, 6 * dps)):
            try:
                raw = mpmath.polyroots(desc, maxsteps=steps, extraprec=extra)
                break
            except mpmath.libmp.NoConvergence:
                continue
        else:
            raise RootSolveError("mpmath.polyroots did not converge")
        raw = [mpmath.mpc(r) for r in raw]
        # a double root comes out split by ~10^(-dps/2); genuine pairs are wider
        tol = mpmath.mpf(10) ** (-(dps // 2 - 2))
        used = [False] * len(raw)
        merged = []
        for i, r in enumerate(raw):
            if used[i]:
                continue
            group = [r]
            for j in range(i + 1, len(raw)):
                if not used[j] and abs(raw[j] - r) <= tol * max(1, abs(r)):
                    used[j] = True
                    group.append(raw[j])
            merged.append(Root(complex(sum(group) / len(group)), len(group)))
    real_tol = 10.0 ** (-(dps - 5))
    return sorted(_conjugate_close(merged, real_tol), key=_sort_key)


# --------------------------------------------------------------------------
# classification

@dataclass(frozen=True)
class ClassifiedRoot:
    z: complex
    branch: Optional[SheetBranch]
    category: Category
    residual: float
    multiplicity: int = 1
    residual_other: float = float("nan")

    @property
    def is_complex(self) -> bool:
        return self.z.imag != 0


@dataclass(frozen=True)
class Spectrum:
    params: ModelParams
    roots: Tuple[ClassifiedRoot, ...]
    n_complex_pairs: int
    polynomial: DispersionPolynomial
    warnings: Tuple[str, ...] = ()

    @property
    def has_degenerate(self) -> bool:
        return any(r.category is Category.DEGENERATE for r in self.roots)


def heff(z: complex, p: ModelParams, branch=SheetBranch.PLUS) -> np.ndarray:
    """Effective Hamiltonian on the given sheet (1x1 for a single state)."""
    s = sigma_closed(z, branch, p.medium)
    if p.is_single:
        return np.array([[p.eps_a + p.alpha_a**2 * s]])
    a, b = p.alpha_a, p.alpha_b
    return np.array([[p.eps_a + a * a * s, a * b * s],
                     [a * b * s, p.eps_b + b * b * s]])


def branch_residual(z: complex, p: ModelParams, branch: SheetBranch) -> float:
    """|det(H_eff(z) - z I)| with the self-energy on ``branch``."""
    h = heff(z, p, branch)
    if h.shape == (1, 1):
        return abs(h[0, 0] - z)
    return abs((h[0, 0] - z) * (h[1, 1] - z) - h[0, 1] * h[1, 0])


def classify_root(z: complex, p: ModelParams, multiplicity: int = 1) -> ClassifiedRoot:
    z = complex(z)
    if abs(z) < BRANCH_POINT_RADIUS:
        return ClassifiedRoot(z, None, Category.DEGENERATE, float("inf"), multiplicity)
    rp = branch_residual(z, p, SheetBranch.PLUS)
    rm = branch_residual(z, p, SheetBranch.MINUS)
    tol = CLASSIFY_TOL * max(1.0, abs(z) ** 2)
    branch, res, other = ((SheetBranch.PLUS, rp, rm) if rp <= rm
                          else (SheetBranch.MINUS, rm, rp))
    if res > tol:
        return ClassifiedRoot(z, None, Category.DEGENERATE, res, multiplicity, other)
    if z.imag == 0:
        cat = (Category.BOUND_FIRST_SHEET if branch is SheetBranch.PLUS
               else Category.REAL_SECOND_SHEET)
    elif z.imag < 0:
        cat = Category.RESONANCE
    else:
        cat = Category.ANTI_RESONANCE
    return ClassifiedRoot(z, branch, cat, res, multiplicity, other)


def count_complex_pairs(roots: Sequence) -> int:
    n = sum(r.multiplicity for r in roots if complex(r.z).imag != 0)
    return n // 2


def spectrum(p: ModelParams, dps: Optional[int] = None) -> Spectrum:
    """Build, solve and classify: the full discrete spectrum of ``p``."""
    warnings = require_valid(p)
    poly = build_dispersion(p, dps)
    roots = solve_roots(poly)
    classified = tuple(classify_root(r.z, p, r.multiplicity) for r in roots)
    return Spectrum(p, classified, count_complex_pairs(roots), poly, tuple(warnings))


def dispersion_terms(z: complex, p: ModelParams, branch: Optional[SheetBranch] = None):
    """Split ``z`` into (bare level, direct continuum shift, indirect coupling via |b>).

    The three terms sum to ``z`` at an eigenvalue.  The branch defaults to
    the one assigned by :func:`classify_root`.
    """
    z = complex(z)
    if branch is None:
        cr = classify_root(z, p)
        if cr.branch is None:
            raise ValueError(f"z={z} is not an eigenvalue on either sheet")
        branch = cr.branch
    s = sigma_closed(z, branch, p.medium)
    direct = p.alpha_a**2 * s
    if p.is_single:
        return complex(p.eps_a), direct, 0j
    denom = z - p.eps_b - p.alpha_b**2 * s
    num = p.alpha_a**2 * p.alpha_b**2 * s * s
    if num == 0:
        return complex(p.eps_a), direct, 0j
    if abs(denom) < 1e-14:
        raise ValueError(f"z={z} sits on the pole of the indirect term")
    return complex(p.eps_a), direct, num / denom

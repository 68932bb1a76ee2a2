"""Asymptotic eigenvalue formulas and their validation against exact roots.

Four local expansions are provided (1D unless noted):

* ``z_ep_single``      square-root bifurcation at the single-level EP,
* ``z_ep_two``         the same with an interaction-corrected coupling,
* ``fano_deviation`` / ``z_fano_small``   deviation from the BIC ``z = eps_A``,
* ``z_meeting_polar``  the ``eps^(5/2)`` splitting at the meeting point (1D and 3D).

The rest of the module compares them with exact roots and estimates
Puiseux exponents and the order of the transition.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Dict, List, NamedTuple, Optional, Sequence

import numpy as np
from scipy import optimize, stats

from .critical import ep_single_closed_form
from .dispersion import (ClassifiedRoot, DispersionPolynomial, build_dispersion,
                         build_dispersion_3d_rescaled, solve_roots, spectrum)
from .model import Medium, ModelParams, PolarCoords
from .selfenergy import SheetBranch

# "u << alpha^(4/3)" is read as u below this fraction of alpha^(4/3)
WINDOW_FRACTION = 0.1
DEFAULT_DPS = 40


class ExpansionResult(NamedTuple):
    z_plus: complex
    z_minus: complex
    valid: bool
    window: str
    truncation_order: str


def _pair(center: complex, split: complex) -> tuple:
    return complex(center + split), complex(center - split)


# --------------------------------------------------------------------------
# square-root bifurcations

def _bifurcation(eps: float, alpha: float, eps_c: float) -> tuple:
    u = eps - eps_c
    a = (eps + alpha**2) / 3
    b = (2 * math.pi * alpha**2) ** (1 / 3) / math.sqrt(3)
    # for u < 0 the square root is imaginary and the pair is real
    return _pair(a, 1j * b * np.sqrt(complex(u))), u


def z_ep_single(eps_a: float, alpha: float = 0.1) -> ExpansionResult:
    """Eigenvalue pair near the single-level EP,
    ``z = (eps_a + a^2)/3 +- (i/sqrt 3)(2 pi a^2)^(1/3) sqrt(eps_a - eps_c)``.

    Below the EP the same expression gives the two real roots.
    """
    eps_c = ep_single_closed_form(alpha).eps_a
    (zp, zm), u = _bifurcation(eps_a, alpha, eps_c)
    window = f"|u| < {WINDOW_FRACTION:g} alpha^(4/3)"
    return ExpansionResult(zp, zm, abs(u) < WINDOW_FRACTION * alpha ** (4 / 3), window, "O(u)")


class CouplingCase(str, enum.Enum):
    CASE_A = "CaseA"  # eps_b > 0 > eps_a
    CASE_B = "CaseB"  # 0 > eps_b > eps_a


@dataclass(frozen=True)
class CorrectedCoupling:
    alpha_tilde: float
    eps_tilde_c: float
    xi: complex
    case: CouplingCase


def coupling_case(eps_a: float, eps_b: float, alpha: float) -> CouplingCase:
    if abs(eps_b - eps_a) <= alpha:
        raise ValueError(f"levels too close for the weak-interaction expansion: "
                         f"|eps_b - eps_a| = {abs(eps_b - eps_a):g} <= alpha = {alpha:g}")
    if eps_b > 0 > eps_a:
        return CouplingCase.CASE_A
    if 0 > eps_b > eps_a:
        return CouplingCase.CASE_B
    raise ValueError("need eps_b > 0 > eps_a or 0 > eps_b > eps_a")


def corrected_coupling(eps_a: float, eps_b: float, alpha: float = 0.1) -> CorrectedCoupling:
    """Effective coupling of the bifurcating level when the other level is far away.

    ``xi = 1 + (e1 - z_c)/(e2 - z_c)`` at the single-level ``z_c``; the
    bifurcating level is ``e1 = eps_a`` in case A and ``e1 = eps_b`` in case B.
    """
    case = coupling_case(eps_a, eps_b, alpha)
    zc = ep_single_closed_form(alpha).z_c.real
    near, far = (eps_a, eps_b) if case is CouplingCase.CASE_A else (eps_b, eps_a)
    xi = 1 + (near - zc) / (far - zc)
    a_t = alpha * abs(xi) ** 0.5
    eps_t = -3 * (math.pi * a_t**2 / 4) ** (2 / 3) - a_t**2
    return CorrectedCoupling(a_t, eps_t, complex(xi), case)


def z_ep_two(eps_a: float, p: ModelParams) -> ExpansionResult:
    """Bifurcating pair of the two-level model using the corrected coupling.

    ``p`` supplies ``eps_b`` and the (equal) coupling; ``eps_a`` overrides ``p.eps_a``.
    In case B the level that bifurcates is ``eps_b``, so it takes the place of ``eps_a``.
    """
    if p.alpha_a != p.alpha_b:
        raise ValueError("expansion assumes equal couplings")
    cc = corrected_coupling(eps_a, p.eps_b, p.alpha_a)
    e = eps_a if cc.case is CouplingCase.CASE_A else p.eps_b
    (zp, zm), u = _bifurcation(e, cc.alpha_tilde, cc.eps_tilde_c)
    valid = abs(u) < WINDOW_FRACTION * cc.alpha_tilde ** (4 / 3)
    return ExpansionResult(zp, zm, valid, f"|u| < {WINDOW_FRACTION:g} alpha_tilde^(4/3)", "O(u)")


def ep_two_approx(eps_b: float, alpha: float = 0.1) -> float:
    """Self-consistent EP of case A: the root of ``eps_a = eps_tilde_c(eps_a, eps_b)``."""
    if not eps_b > 0:
        raise ValueError("case A needs eps_b > 0")
    zc = ep_single_closed_form(alpha).z_c.real
    # alpha_tilde -> 0 at eps_a = zc - 2 (eps_b - zc); stay inside (that, -alpha/2)
    lo = max(zc - 2 * (eps_b - zc) + 1e-12, eps_b - 1.0)
    hi = min(zc, eps_b - alpha) - 1e-12

    def g(x):
        return corrected_coupling(x, eps_b, alpha).eps_tilde_c - x

    return optimize.brentq(g, lo, hi, xtol=1e-14)


# --------------------------------------------------------------------------
# around the Fano (BIC) point

class DegenerateQuadratic(ValueError):
    pass


@dataclass(frozen=True)
class FanoDeviation:
    p_plus: complex
    p_minus: complex
    discriminant: float
    coeffs: tuple  # (a, b, c) of a p^2 + b p + c

    def z(self, eps_A: float) -> tuple:
        return eps_A + self.p_plus, eps_A + self.p_minus


def fano_quadratic(eps_A: float, eps_D: float, alpha: float) -> tuple:
    """Coefficients of the quadratic truncation in ``p = z - eps_A``."""
    a2, a4, d2 = alpha**2, alpha**4, eps_D**2
    a = 4 * a4 * eps_A + 4 * a2 * d2 - 2 * eps_A * d2 + math.pi**2 * a4
    b = d2 * (4 * a2 * eps_A + d2)
    c = eps_A * d2**2
    return a, b, c


def fano_discriminant(eps_A: float, eps_D: float, alpha: float) -> float:
    """``b^2 - 4ac`` in factored form (valid for ``eps_A != 0``)."""
    a4, d2 = alpha**4, eps_D**2
    pa = math.pi**2 * a4
    return -4 * pa * eps_A * d2**2 * (1 + 2 * (alpha**2 - eps_A) * d2 / pa
                                      - d2**2 / (4 * pa * eps_A))


def fano_deviation(eps_A: float, eps_D: float, alpha: float = 0.1) -> FanoDeviation:
    a, b, c = fano_quadratic(eps_A, eps_D, alpha)
    if abs(a) <= 1e-14 * max(abs(b), abs(c), alpha**4):
        raise DegenerateQuadratic(f"leading coefficient vanishes (a = {a:.3g})")
    disc = b * b - 4 * a * c
    root = np.sqrt(complex(disc))
    return FanoDeviation(complex((-b + root) / (2 * a)), complex((-b - root) / (2 * a)),
                         disc, (a, b, c))


def z_fano_small(eps_A: float, eps_D: float, alpha: float = 0.1) -> ExpansionResult:
    """Leading ``eps_D^2`` splitting off the BIC (1D, ``eps_A > 0``)."""
    if not eps_A > 0:
        raise ValueError("small-eps_D expansion needs eps_A > 0")
    den = alpha**2 * (math.pi**2 + 4 * eps_A)
    re = eps_A - 2 * eps_A * eps_D**2 / den
    im = math.pi * math.sqrt(eps_A) * eps_D**2 / den
    # dropped terms of the discriminant relative to its leading one
    pa = math.pi**2 * alpha**4
    rest = max(abs(2 * (alpha**2 - eps_A) * eps_D**2 / pa), eps_D**4 / (4 * pa * eps_A))
    zp, zm = _pair(re, 1j * im)
    return ExpansionResult(zp, zm, rest < WINDOW_FRACTION, "dropped discriminant terms < 0.1",
                           "O(eps_D^4)")


def z_meeting_polar(c: PolarCoords, alpha: float = 0.1, medium=Medium.ONE_D) -> ExpansionResult:
    """Eigenvalue pair near ``eps_A = eps_D = 0`` along the ray at angle ``theta``.

    1D: ``z = s e - (2 c^2 s / (pi^2 a^2)) e^3 +- i (c^2 sqrt(s) / (pi a^2)) e^(5/2)``
    3D: ``z = s e + (c^2 / (pi a^2)) e^2 +- i (c^2 sqrt(s) / (2 a^2)) e^(5/2)``

    with ``s = sin(theta)``, ``c = cos(theta)``.  The 3D form belongs to the
    quartic of :func:`build_dispersion_3d_rescaled`.
    """
    eps = c.eps
    if eps < 0:
        raise ValueError("polar radius must be non-negative")
    s, co2 = math.sin(c.theta), math.cos(c.theta) ** 2
    if s < -1e-15:
        raise ValueError("expansion undefined for sin(theta) < 0 (eps_A < 0)")
    s = max(s, 0.0)
    if Medium(medium) is Medium.ONE_D:
        re = s * eps - 2 * co2 * s / (math.pi**2 * alpha**2) * eps**3
        im = co2 * math.sqrt(s) / (math.pi * alpha**2) * eps**2.5
        limit, window, order = (4 * math.pi**2 * alpha**4) ** (1 / 3), "eps <= (4 pi^2 alpha^4)^(1/3)", "O(eps^(7/2))"
    else:
        re = s * eps + co2 / (math.pi * alpha**2) * eps**2
        im = co2 * math.sqrt(s) / (2 * alpha**2) * eps**2.5
        limit, window, order = math.pi**4 * alpha**4 / 4, "eps <= pi^4 alpha^4 / 4", "O(eps^3)"
    zp, zm = _pair(re, 1j * im)
    return ExpansionResult(zp, zm, eps <= limit, window, order)


def gamma_fano(eps_D: float, eps_b: float, alpha: float = 0.1) -> float:
    """Decay rate ``sqrt(eps_D + eps_b) eps_D^2 / (pi alpha^2)`` near the Fano point."""
    r = eps_D + eps_b
    if r < 0:
        raise ValueError("eps_D + eps_b must be non-negative")
    return math.sqrt(r) * eps_D**2 / (math.pi * alpha**2)


def gamma_fano_d2(eps_b: float, alpha: float = 0.1) -> float:
    """Curvature of :func:`gamma_fano` at ``eps_D = 0``."""
    if eps_b < 0:
        raise ValueError("eps_b must be non-negative")
    return 2 * math.sqrt(eps_b) / (math.pi * alpha**2)


# --------------------------------------------------------------------------
# exponent fits

class PuiseuxFit(NamedTuple):
    slope: float
    stderr: float
    prefactor: float


def fit_puiseux_exponent(samples: Sequence, range: Optional[tuple] = None) -> PuiseuxFit:
    """Least-squares slope of ``log Im z`` against ``log eps``.

    Parameters
    ----------
    samples : sequence of (eps, im_z)
    range : (lo, hi), optional
        Keep only samples with ``lo <= eps <= hi``.
    """
    pts = [(float(e), float(y)) for e, y in samples]
    if range is not None:
        pts = [(e, y) for e, y in pts if range[0] <= e <= range[1]]
    if len(pts) < 8:
        raise ValueError("need at least 8 samples")
    e, y = np.array(pts).T
    if np.any(e <= 0) or np.any(y <= 0):
        raise ValueError("samples must have eps > 0 and Im z > 0")
    if math.log10(e.max() / e.min()) < 1.5:
        raise ValueError("samples must span at least 1.5 decades")
    fit = stats.linregress(np.log(e), np.log(y))
    return PuiseuxFit(float(fit.slope), float(fit.stderr), float(math.exp(fit.intercept)))


# --------------------------------------------------------------------------
# comparison with exact roots

def match_root(z: complex, roots: Sequence) -> complex:
    """Exact root nearest to ``z``; ties go to the continued (second-sheet) root."""
    def key(r):
        zr = r.z if isinstance(r, ClassifiedRoot) else complex(r)
        second = isinstance(r, ClassifiedRoot) and r.branch is SheetBranch.MINUS
        return (round(abs(zr - z), 15), 0 if second else 1)
    best = min(roots, key=key)
    return best.z if isinstance(best, ClassifiedRoot) else complex(best)


def polar_roots(c: PolarCoords, alpha: float, medium=Medium.ONE_D,
                dps: Optional[int] = DEFAULT_DPS) -> List[complex]:
    """All roots at polar point ``c`` (3D uses the quartic matching the polar formula)."""
    p = c.to_symmetric(alpha).to_params(medium)
    poly = build_dispersion(p, dps) if Medium(medium) is Medium.ONE_D else build_dispersion_3d_rescaled(p, dps)
    return [r.z for r in solve_roots(poly)]


def polar_samples(alpha: float = 0.1, medium=Medium.ONE_D, lo: float = 1e-4, hi: float = 1e-2,
                  n: int = 20, theta: float = math.pi / 4, dps: Optional[int] = DEFAULT_DPS):
    """``(eps, |Im z|)`` of the bifurcating root along a ray through the meeting point."""
    out = []
    for eps in np.logspace(math.log10(lo), math.log10(hi), n):
        c = PolarCoords(float(eps), theta)
        z = match_root(z_meeting_polar(c, alpha, medium).z_plus, polar_roots(c, alpha, medium, dps))
        out.append((float(eps), abs(z.imag)))
    return out


def single_ep_samples(alpha: float = 0.1, lo: float = 1e-6, hi: float = 1e-4, n: int = 20,
                      dps: Optional[int] = DEFAULT_DPS):
    """``(u, |Im z|)`` of the bifurcating root at ``eps_a = eps_c + u`` (single level)."""
    eps_c = ep_single_closed_form(alpha).eps_a
    out = []
    for u in np.logspace(math.log10(lo), math.log10(hi), n):
        ea = eps_c + float(u)
        roots = spectrum(ModelParams.single(ea, alpha), dps).roots
        z = match_root(z_ep_single(ea, alpha).z_plus, roots)
        out.append((float(u), abs(z.imag)))
    return out


def fano_gamma_exact(eps_D: float, eps_b: float, alpha: float = 0.1, medium=Medium.ONE_D,
                     dps: Optional[int] = DEFAULT_DPS) -> float:
    """``|Im z|`` of the root nearest ``eps_A`` at ``eps_a = eps_b + 2 eps_D``."""
    p = ModelParams.double(eps_b + 2 * eps_D, eps_b, alpha, medium)
    eA = eps_b + eps_D
    return abs(match_root(complex(eA), spectrum(p, dps).roots).imag)


def fd_gamma_curvature(eps_b: float, alpha: float = 0.1, h: float = 1e-4,
                       dps: Optional[int] = DEFAULT_DPS) -> float:
    """Central second difference of the exact decay rate in ``eps_D`` at the Fano point."""
    g = [fano_gamma_exact(d, eps_b, alpha, dps=dps) for d in (-h, 0.0, h)]
    return (g[0] - 2 * g[1] + g[2]) / h**2


class ValidationRow(NamedTuple):
    parameter: float
    exact: complex
    approx: complex
    rel_err: float
    valid: bool


def validate_expansion(kind: str, values: Sequence[float], alpha: float = 0.1,
                       medium=Medium.ONE_D, eps_b: float = 0.2, eps_A: float = 0.2,
                       theta: float = math.pi / 4,
                       dps: Optional[int] = DEFAULT_DPS) -> List[ValidationRow]:
    """Compare an expansion with the matched exact root over ``values``.

    ``kind`` and the scanned parameter:

    * ``"single"``  u = eps_a - eps_c (single level),
    * ``"two"``     eps_a at fixed ``eps_b``,
    * ``"fano"``    eps_D at fixed ``eps_A`` (quadratic truncation),
    * ``"polar"``   eps along ``theta``.

    ``rel_err`` is measured on the deviation from the expansion point
    (``z_c``, ``eps_A`` or ``sin(theta) eps``), which is what the expansion predicts.
    """
    rows = []
    for v in values:
        v = float(v)
        if kind == "single":
            ep = ep_single_closed_form(alpha)
            ea = ep.eps_a + v
            res = z_ep_single(ea, alpha)
            roots = spectrum(ModelParams.single(ea, alpha), dps).roots
            anchor = ep.z_c
        elif kind == "two":
            p = ModelParams.double(v, eps_b, alpha)
            res = z_ep_two(v, p)
            roots = spectrum(p, dps).roots
            anchor = ep_single_closed_form(alpha).z_c
        elif kind == "fano":
            fd = fano_deviation(eps_A, v, alpha)
            zp, zm = fd.z(eps_A)
            res = ExpansionResult(zp, zm, True, "", "O(p^3)")
            roots = spectrum(ModelParams.double(eps_A + v, eps_A - v, alpha), dps).roots
            anchor = complex(eps_A)
        elif kind == "polar":
            c = PolarCoords(v, theta)
            res = z_meeting_polar(c, alpha, medium)
            roots = polar_roots(c, alpha, medium, dps)
            anchor = complex(math.sin(theta) * v)
        else:
            raise ValueError(f"unknown expansion kind {kind!r}")
        exact = match_root(res.z_plus, roots)
        scale = abs(exact - anchor)
        err = abs(res.z_plus - exact) / scale if scale > 0 else abs(res.z_plus - exact)
        rows.append(ValidationRow(v, exact, res.z_plus, err, res.valid))
    return rows


# --------------------------------------------------------------------------
# order of the transition

def _central_difference(g: Callable[[float], float], k: int, h: float) -> float:
    total = 0.0
    for j in range(k + 1):
        total += (-1) ** j * math.comb(k, j) * g((k / 2 - j) * h)
    return total / h**k


@dataclass(frozen=True)
class TransitionOrder:
    order: Optional[int]        # lowest discontinuous derivative + 1
    scaling: Dict[int, float]   # D_k ~ h^s, s per derivative order k
    estimates: Dict[int, float]  # Richardson-extrapolated D_k at the base step


def transition_order(g: Callable[[float], float], h: float = 1e-3, kmax: int = 4) -> TransitionOrder:
    """Order of a transition at 0 from how finite differences of ``g`` scale with the step.

    ``g`` is the decay rate (``|Im z|``) as a function of the distance from
    the transition.  A derivative of order k that exists settles or
    vanishes as ``h -> 0``; one that is discontinuous grows.  The first
    growing order k makes the transition of order k + 1.
    """
    scaling, est = {}, {}
    order = None
    for k in range(1, kmax + 1):
        def rich(step):
            return (4 * _central_difference(g, k, step / 2) - _central_difference(g, k, step)) / 3
        d1, d2 = rich(h), rich(h / 4)
        est[k] = d1
        if d1 == 0 or d2 == 0:
            s = math.inf
        else:
            s = math.log(abs(d2) / abs(d1)) / math.log(0.25)
        scaling[k] = s
        if order is None and s < -0.25:
            order = k + 1
    return TransitionOrder(order, scaling, est)


def meeting_point_rate(alpha: float = 0.1, theta: float = math.pi / 4, medium=Medium.ONE_D,
                       dps: Optional[int] = DEFAULT_DPS) -> Callable[[float], float]:
    """``|Im z|`` of the bifurcating root at signed distance ``t`` along the ray through 0."""
    def g(t: float) -> float:
        if t == 0:
            return 0.0
        th = theta if t > 0 else theta + math.pi
        c = PolarCoords(abs(t), th)
        p = c.to_symmetric(alpha).to_params(medium)
        roots = spectrum(p, dps).roots
        return abs(match_root(complex(c.eps_A), roots).imag)
    return g


def single_ep_rate(alpha: float = 0.1, dps: Optional[int] = DEFAULT_DPS) -> Callable[[float], float]:
    """``|Im z|`` of the bifurcating root at ``eps_a = eps_c + t`` (single level)."""
    ep = ep_single_closed_form(alpha)

    def g(t: float) -> float:
        roots = spectrum(ModelParams.single(ep.eps_a + t, alpha), dps).roots
        return abs(match_root(ep.z_c, roots).imag)
    return g

"""Exceptional points, phases and the bound-state-in-continuum (Fano) locus."""
from __future__ import annotations

import enum
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .dispersion import (BRANCH_POINT_RADIUS, Category, DispersionPolynomial, build_dispersion,
                         solve_roots, spectrum)
from .model import Medium, ModelParams, NStates

log = logging.getLogger(__name__)

BISECTION_TOL = 1e-12
EP_CERT_TOL = 1e-8
BIC_TOL = 1e-12
FANO_REJECT_WIDTH = 1e-4


class CurveId(str, enum.Enum):
    SINGLE_CLOSED_FORM = "SingleClosedForm"
    CURVE1 = "Curve1"  # stable | single resonance
    CURVE2 = "Curve2"  # single | double resonance


class PhaseLabel(str, enum.Enum):
    STABLE = "Stable"
    SINGLE_RESONANCE = "SingleResonance"
    DOUBLE_RESONANCE = "DoubleResonance"

    @classmethod
    def from_pairs(cls, n: int) -> "PhaseLabel":
        return (cls.STABLE, cls.SINGLE_RESONANCE, cls.DOUBLE_RESONANCE)[n]

    @property
    def pairs(self) -> int:
        return ("Stable", "SingleResonance", "DoubleResonance").index(self.value)


class IndeterminatePhase(RuntimeError):
    """Raised at exact boundary points where roots coalesce on the branch point."""


@dataclass(frozen=True)
class EPPoint:
    eps_a: float
    eps_b: Optional[float]
    z_c: complex
    curve_id: Optional[CurveId]
    flagged: bool = False


# --------------------------------------------------------------------------
# resultants

def _coeff_list(f) -> List[float]:
    if isinstance(f, DispersionPolynomial):
        return [float(c) for c in f.coeffs]
    return [float(c) for c in f]


def sylvester_matrix(f, g) -> np.ndarray:
    """Sylvester matrix of two polynomials given in ascending coefficient order."""
    a = _coeff_list(f)[::-1]
    b = _coeff_list(g)[::-1]
    m, n = len(a) - 1, len(b) - 1
    if m < 1 or n < 1:
        raise ValueError("both polynomials need degree >= 1")
    S = np.zeros((m + n, m + n))
    for i in range(n):
        S[i, i:i + m + 1] = a
    for i in range(m):
        S[n + i, i:i + n + 1] = b
    return S


def sylvester_resultant(f, g) -> float:
    """res(f, g) = det of the Sylvester matrix (LU with partial pivoting)."""
    return float(np.linalg.det(sylvester_matrix(f, g)))


def discriminant_resultant(p: ModelParams) -> float:
    """res(f, f') of the dispersion polynomial, up to a positive factor.

    Coefficients are scaled to unit max-norm first; only the sign and the
    zero set matter for locating exceptional points.
    """
    c = build_dispersion(p).as_array()
    c = c / np.max(np.abs(c))
    d = (np.arange(len(c)) * c)[1:]
    return sylvester_resultant(c, d)


# --------------------------------------------------------------------------
# exceptional points

def ep_single_closed_form(alpha: float, medium=Medium.ONE_D) -> EPPoint:
    """Bifurcation point of the single-level model.

    1D: ``eps_c = -3 (pi a^2/4)^(2/3) - a^2``, ``z_c = -(pi a^2/4)^(2/3)``.
    3D: the quadratic ``(z - eps + pi a^2)^2 + (pi^4 a^4/4) z`` has a double root at
    ``eps_c = pi a^2 + pi^4 a^4/16``, ``z_c = -pi^4 a^4/16``.
    """
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    if Medium(medium) is Medium.ONE_D:
        w = (math.pi * alpha**2 / 4) ** (2.0 / 3.0)
        return EPPoint(-3 * w - alpha**2, None, complex(-w, 0.0), CurveId.SINGLE_CLOSED_FORM)
    k = math.pi**4 * alpha**4 / 16
    return EPPoint(math.pi * alpha**2 + k, None, complex(-k, 0.0), CurveId.SINGLE_CLOSED_FORM)


def _sign(x: float) -> int:
    return (x > 0) - (x < 0)


def _curve_for(left: int, right: int) -> Optional[CurveId]:
    pair = {left, right}
    if pair == {0, 1}:
        return CurveId.CURVE1
    if pair == {1, 2}:
        return CurveId.CURVE2
    return None


def _near_double_root(p: ModelParams) -> complex:
    f = build_dispersion(p)
    crit = solve_roots(f.derivative())
    return min((r.z for r in crit), key=lambda z: abs(f(z)) / max(f.scale_at(z), 1e-300))


def _is_fano_crossing(p: ModelParams, zc: complex) -> bool:
    """Double root at z = eps_A on the line eps_a = eps_b away from threshold (a BIC)."""
    if p.is_single or p.alpha_a != p.alpha_b:
        return False
    eA, eD = 0.5 * (p.eps_a + p.eps_b), 0.5 * (p.eps_a - p.eps_b)
    # the resultant touches zero tangentially here, so bisection may stall
    # a little way off the line where its sign is lost in rounding
    near_line = abs(eD) < FANO_REJECT_WIDTH and abs(eD) < 1e-3 * abs(eA)
    return near_line and abs(zc - eA) <= max(1e-6, abs(eD)) and abs(zc) > 1e-6


def _pairs(p: ModelParams) -> int:
    try:
        return spectrum(p).n_complex_pairs
    except Exception:  # pragma: no cover - reported as indeterminate
        log.exception("spectrum failed at %s", p)
        return -1


def _outward(counts: Sequence[int], i: int, step: int) -> int:
    while 0 <= i < len(counts):
        if counts[i] >= 0:
            return counts[i]
        i += step
    return -1


def _bisect(fn, lo: float, hi: float, s_lo: int, tol: float) -> float:
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        s = _sign(fn(mid))
        if s == 0:
            return mid
        if s == s_lo:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def ep_locate_line(p: ModelParams, param: str, lo: float, hi: float, n: int,
                   pair_counts: Optional[Sequence[int]] = None) -> List[EPPoint]:
    """Exceptional points met while ``param`` ('eps_a' or 'eps_b') sweeps [lo, hi].

    Sign changes of res(f, f') between the ``n`` samples are bisected to
    width 1e-12; a bracket counts only if the number of complex-conjugate
    pairs differs across it.  Double roots on the Fano line (BICs) are
    not exceptional points and are dropped.
    """
    if param not in ("eps_a", "eps_b"):
        raise ValueError("param must be 'eps_a' or 'eps_b'")
    if param == "eps_b" and p.is_single:
        raise ValueError("single-state model has no eps_b")
    if not lo < hi or n < 2:
        raise ValueError("need lo < hi and n >= 2")
    xs = np.linspace(lo, hi, n)

    def at(x):
        return p.replace(**{param: float(x)})

    def res(x):
        return discriminant_resultant(at(x))

    values = [res(x) for x in xs]
    counts = list(pair_counts) if pair_counts is not None else [_pairs(at(x)) for x in xs]
    # on the Fano line one pair collapses to a real double root; that sample
    # says nothing about the phases on either side
    for k, x in enumerate(xs):
        q = at(x)
        if not q.is_single and q.alpha_a == q.alpha_b and abs(q.eps_a - q.eps_b) < 1e-12:
            counts[k] = -1
    signs = [_sign(v) for v in values]

    brackets = []
    for i in range(n - 1):
        if signs[i] == 0:
            continue
        j = i + 1
        while j < n and signs[j] == 0:
            j += 1
        if j < n and signs[j] != signs[i]:
            brackets.append((i, j))

    found: List[EPPoint] = []
    for i, j in brackets:
        left, right = _outward(counts, i, -1), _outward(counts, j, +1)
        if left == right:
            log.debug("tangential resultant zero in [%g, %g] ignored", xs[i], xs[j])
            continue
        x = _bisect(res, float(xs[i]), float(xs[j]), signs[i], BISECTION_TOL)
        q = at(x)
        zc = _near_double_root(q)
        if _is_fano_crossing(q, zc):
            log.debug("Fano (BIC) crossing at %s=%g ignored", param, x)
            continue
        f = build_dispersion(q)
        tol = EP_CERT_TOL * max(1.0, abs(zc) ** 2)
        certified = abs(f(zc)) < tol and abs(f.derivative()(zc)) < tol
        if not certified:
            log.warning("bisection stalled in [%g, %g]: |f(zc)|=%.3g", xs[i], xs[j], abs(f(zc)))
        curve = _curve_for(left, right)
        if any(abs((e.eps_a if param == "eps_a" else e.eps_b) - x) < 1e-9 for e in found):
            continue
        found.append(EPPoint(q.eps_a, None if q.is_single else q.eps_b, complex(zc), curve,
                             flagged=(curve is None) or not certified))
    return found


# --------------------------------------------------------------------------
# phases

def classify_phase(p: ModelParams) -> PhaseLabel:
    s = spectrum(p)
    for r in s.roots:
        if (r.category is Category.DEGENERATE and r.multiplicity > 1
                and abs(r.z) < BRANCH_POINT_RADIUS):
            raise IndeterminatePhase(f"roots coalesce on the branch point at {p}")
    return PhaseLabel.from_pairs(s.n_complex_pairs)


def _cell(args) -> int:
    a, b, alpha, medium = args
    try:
        return classify_phase(ModelParams.double(a, b, alpha, medium)).pairs
    except IndeterminatePhase:
        return -1


def _row(args) -> List[int]:
    a, bs, alpha, medium = args
    return [_cell((a, b, alpha, medium)) for b in bs]


@dataclass
class PhaseDiagram:
    eps_a: np.ndarray
    eps_b: np.ndarray
    pairs: np.ndarray  # [i_a, i_b]; -1 marks an indeterminate cell
    alpha: float
    medium: Medium
    ep_points: List[EPPoint] = field(default_factory=list)
    ep_curves: List[Tuple[CurveId, List[EPPoint]]] = field(default_factory=list)
    fano_line: np.ndarray = field(default_factory=lambda: np.zeros((0, 2)))
    meeting_point: Optional[EPPoint] = None

    def label(self, i: int, j: int) -> Optional[PhaseLabel]:
        n = int(self.pairs[i, j])
        return None if n < 0 else PhaseLabel.from_pairs(n)

    def phases_present(self) -> set:
        return {PhaseLabel.from_pairs(int(n)) for n in np.unique(self.pairs) if n >= 0}


def _link(points: List[EPPoint], radius: float) -> List[List[EPPoint]]:
    """Chain points into polylines: connected components under ``radius``, walked greedily."""
    pts = np.array([[e.eps_a, e.eps_b] for e in points]) if points else np.zeros((0, 2))
    unvisited = set(range(len(points)))
    lines = []
    while unvisited:
        seed = unvisited.pop()
        comp, stack = {seed}, [seed]
        while stack:
            k = stack.pop()
            near = [m for m in unvisited if np.hypot(*(pts[m] - pts[k])) <= radius]
            for m in near:
                unvisited.discard(m)
                comp.add(m)
                stack.append(m)
        comp = sorted(comp)
        centre = pts[comp].mean(axis=0)
        start = max(comp, key=lambda m: np.hypot(*(pts[m] - centre)))
        order, rest = [start], set(comp) - {start}
        while rest:
            last = pts[order[-1]]
            nxt = min(rest, key=lambda m: np.hypot(*(pts[m] - last)))
            order.append(nxt)
            rest.discard(nxt)
        lines.append([points[m] for m in order])
    return lines


def phase_diagram(a_lo: float, a_hi: float, b_lo: float, b_hi: float, na: int, nb: int,
                  alpha: float = 0.1, medium=Medium.ONE_D, workers: int = 1,
                  trace_curves: bool = True) -> PhaseDiagram:
    """Phase of every cell of an (eps_a, eps_b) grid plus the EP curves between them."""
    if na < 2 or nb < 2:
        raise ValueError("need at least 2 points per axis")
    medium = Medium(medium)
    A = np.linspace(a_lo, a_hi, na)
    B = np.linspace(b_lo, b_hi, nb)
    jobs = [(float(a), [float(b) for b in B], alpha, medium) for a in A]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            rows = list(ex.map(_row, jobs, chunksize=max(1, na // (4 * workers))))
    else:
        rows = [_row(j) for j in jobs]
    pairs = np.array(rows, dtype=int)
    diag = PhaseDiagram(A, B, pairs, alpha, medium)
    t = np.linspace(max(a_lo, b_lo), min(a_hi, b_hi), max(na, nb))
    diag.fano_line = np.column_stack([t, t]) if t.size and t[0] <= t[-1] else np.zeros((0, 2))
    if not trace_curves:
        return diag

    base = ModelParams.double(0.0, 0.0, alpha, medium)
    points: List[EPPoint] = []
    for j, b in enumerate(B):
        points += ep_locate_line(base.replace(eps_b=float(b)), "eps_a", a_lo, a_hi, na,
                                 pair_counts=pairs[:, j])
    for i, a in enumerate(A):
        points += ep_locate_line(base.replace(eps_a=float(a)), "eps_b", b_lo, b_hi, nb,
                                 pair_counts=pairs[i, :])
    diag.ep_points = points
    step = max((a_hi - a_lo) / (na - 1), (b_hi - b_lo) / (nb - 1))
    for cid in (CurveId.CURVE1, CurveId.CURVE2):
        for line in _link([e for e in points if e.curve_id is cid], 2.5 * step):
            diag.ep_curves.append((cid, line))
    if points:
        nearest = min(points, key=lambda e: math.hypot(e.eps_a, e.eps_b))
        if math.hypot(nearest.eps_a, nearest.eps_b) <= 2 * step:
            diag.meeting_point = nearest
    return diag


# --------------------------------------------------------------------------
# Fano / BIC

@dataclass(frozen=True)
class BICResult:
    is_bic: bool
    f_rel: float
    fprime_rel: float


def bic_check(eps_A: float, alpha: float = 0.1, medium=Medium.ONE_D, eps_D: float = 0.0,
              alpha_b: Optional[float] = None) -> BICResult:
    """Is z = eps_A a double real root?  Residuals are relative to the term scale."""
    if alpha_b is not None and alpha_b != alpha:
        raise ValueError("BIC check is defined for equal couplings only")
    p = ModelParams.double(eps_A + eps_D, eps_A - eps_D, alpha, medium)
    f = build_dispersion(p)
    df = f.derivative()
    fr = abs(f(eps_A)) / f.scale_at(eps_A)
    dr = abs(df(eps_A)) / df.scale_at(eps_A)
    return BICResult(fr <= BIC_TOL and dr <= BIC_TOL, fr, dr)

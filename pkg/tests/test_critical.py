import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fanoep.critical import (CurveId, EPPoint, IndeterminatePhase, PhaseLabel, bic_check,
                             classify_phase, discriminant_resultant, ep_locate_line,
                             ep_single_closed_form, phase_diagram, sylvester_matrix,
                             sylvester_resultant)
from fanoep.dispersion import build_dispersion, spectrum
from fanoep.model import Medium, ModelParams
from oracles import single_ep_1d


def test_sylvester_examples():
    assert sylvester_resultant([-1, 0, 1], [-1, 1]) == pytest.approx(0, abs=1e-15)
    assert sylvester_resultant([1, 0, 1], [-1, 1]) == pytest.approx(2, rel=1e-14)
    assert sylvester_matrix([1, 0, 1], [-1, 1]).shape == (3, 3)
    with pytest.raises(ValueError):
        sylvester_matrix([1], [1, 1])


@given(st.lists(st.floats(-2, 2), min_size=1, max_size=3), st.lists(st.floats(-2, 2), min_size=1, max_size=3))
def test_resultant_is_product_over_roots(ra, rb):
    # res(f, g) = prod (a_i - b_j) for monic f, g
    f = np.polynomial.polynomial.polyfromroots(ra)
    g = np.polynomial.polynomial.polyfromroots(rb)
    expected = math.prod(a - b for a in ra for b in rb)
    assert sylvester_resultant(f, g) == pytest.approx(expected, rel=1e-8, abs=1e-10)


def test_resultant_vanishes_at_single_ep():
    ep = ep_single_closed_form(0.1)
    f = build_dispersion(ModelParams.single(ep.eps_a, 0.1))
    c = f.as_array() / np.max(np.abs(f.as_array()))
    d = (np.arange(len(c)) * c)[1:]
    assert abs(sylvester_resultant(c, d)) < 1e-10


@pytest.mark.parametrize("alpha", [0.1, 0.2, 1e-4])
def test_single_closed_form(alpha):
    ep = ep_single_closed_form(alpha)
    ea, zc = single_ep_1d(alpha)
    assert ep.eps_a == pytest.approx(ea, rel=1e-15) and ep.z_c == pytest.approx(zc, rel=1e-15)
    assert ep.curve_id is CurveId.SINGLE_CLOSED_FORM and ep.eps_b is None


def test_single_closed_form_values():
    ep = ep_single_closed_form(0.1)
    assert ep.eps_a == pytest.approx(-0.1285353, abs=1e-7)
    assert ep.z_c.real == pytest.approx(-0.039512, abs=1e-6)
    tiny = ep_single_closed_form(1e-6)
    assert -1e-7 < tiny.eps_a < 0 and -1e-7 < tiny.z_c.real < 0
    with pytest.raises(ValueError):
        ep_single_closed_form(0.0)


def test_single_closed_form_3d_is_double_root():
    ep = ep_single_closed_form(0.1, Medium.THREE_D)
    f = build_dispersion(ModelParams.single(ep.eps_a, 0.1, Medium.THREE_D))
    assert abs(f(ep.z_c)) < 1e-15 and abs(f.derivative()(ep.z_c)) < 1e-15


@pytest.mark.parametrize("alpha", [0.05, 0.1, 0.2])
def test_line_scan_matches_closed_form(alpha):
    (ep,) = ep_locate_line(ModelParams.single(0.0, alpha), "eps_a", -0.5, 0.0, 101)
    ref = ep_single_closed_form(alpha)
    assert abs(ep.eps_a - ref.eps_a) < 1e-8 and abs(ep.z_c - ref.z_c) < 1e-8
    assert ep.curve_id is CurveId.CURVE1 and not ep.flagged


def test_two_state_ep_anchor():
    (ep,) = ep_locate_line(ModelParams.double(0.0, 0.2, 0.1), "eps_a", -0.3, 0.1, 81)
    assert ep.eps_a == pytest.approx(-0.099, abs=1e-3)
    assert ep.curve_id is CurveId.CURVE2


def test_meeting_point_on_line():
    eps = ep_locate_line(ModelParams.double(0.0, 0.0, 0.1), "eps_a", -0.1, 0.1, 41)
    # the resultant only touches zero here, so bisection resolves it to ~1e-5
    assert len(eps) == 1 and abs(eps[0].eps_a) < 2e-5 and abs(eps[0].z_c) < 2e-5


def test_line_scan_no_ep():
    assert ep_locate_line(ModelParams.double(0.0, 0.2, 0.1), "eps_a", 0.25, 0.3, 11) == []
    with pytest.raises(ValueError):
        ep_locate_line(ModelParams.single(0.0), "eps_b", -1, 1, 5)
    with pytest.raises(ValueError):
        ep_locate_line(ModelParams.single(0.0), "eps_a", 1, -1, 5)


def test_fano_line_is_not_an_ep():
    # grid samples land exactly on eps_a = eps_b = 0.06
    eps = ep_locate_line(ModelParams.double(0.0, 0.06, 0.1), "eps_a", -0.3, 0.3, 31)
    assert len(eps) == 1 and eps[0].eps_a < 0


def _certified(ep: EPPoint, medium="1d"):
    p = (ModelParams.single(ep.eps_a, 0.1, medium) if ep.eps_b is None
         else ModelParams.double(ep.eps_a, ep.eps_b, 0.1, medium))
    f = build_dispersion(p)
    tol = 1e-8 * max(1.0, abs(ep.z_c) ** 2)
    return abs(f(ep.z_c)) < tol and abs(f.derivative()(ep.z_c)) < tol


@pytest.mark.parametrize("eps_b", [-0.25, -0.1, 0.05, 0.2, 0.3])
@pytest.mark.parametrize("medium", ["1d", "3d"])
def test_pair_count_changes_by_one_across_each_ep(eps_b, medium):
    p = ModelParams.double(0.0, eps_b, 0.1, medium)
    xs = np.arange(-0.3, 0.3 + 1e-12, 1e-3)
    counts = [spectrum(p.replace(eps_a=float(x))).n_complex_pairs for x in xs]
    eps = ep_locate_line(p, "eps_a", -0.3, 0.3, len(xs), pair_counts=counts)
    for ep in eps:
        assert _certified(ep, medium)
    # away from the Fano line every count change is an EP, and vice versa
    changes = [i for i in range(len(xs) - 1) if counts[i] != counts[i + 1]
               and not (xs[i] - 1e-9 <= eps_b <= xs[i + 1] + 1e-9)]
    assert len(changes) == len(eps)
    for i, ep in zip(changes, sorted(eps, key=lambda e: e.eps_a)):
        assert xs[i] <= ep.eps_a <= xs[i + 1]
        assert abs(counts[i] - counts[i + 1]) == 1


def test_classify_phase_examples():
    assert classify_phase(ModelParams.double(-0.3, -0.3, 0.1)) is PhaseLabel.STABLE
    assert classify_phase(ModelParams.double(-0.2, 0.2, 0.1)) is PhaseLabel.SINGLE_RESONANCE
    assert classify_phase(ModelParams.double(0.2, 0.5, 0.1)) is PhaseLabel.DOUBLE_RESONANCE
    assert PhaseLabel.from_pairs(2).pairs == 2
    with pytest.raises(IndeterminatePhase):
        classify_phase(ModelParams.double(0.0, 0.0, 0.1))


@pytest.fixture(scope="module")
def small_diagram():
    return phase_diagram(-0.3, 0.3, -0.3, 0.3, 41, 41, 0.1, "1d")


def test_diagram_phases_and_symmetry(small_diagram):
    d = small_diagram
    assert d.phases_present() == set(PhaseLabel)
    assert np.array_equal(d.pairs, d.pairs.T)
    assert d.pairs[20, 20] == -1 and d.label(20, 20) is None
    assert d.meeting_point is not None and abs(d.meeting_point.eps_a) < 1e-6
    assert d.meeting_point.curve_id is CurveId.CURVE2
    assert {c for c, _ in d.ep_curves} == {CurveId.CURVE1, CurveId.CURVE2}
    assert np.allclose(d.fano_line[:, 0], d.fano_line[:, 1])


def test_adjacent_phase_changes_are_bracketed(small_diagram):
    d = small_diagram
    step = d.eps_a[1] - d.eps_a[0]
    pts = [(e.eps_a, e.eps_b) for e in d.ep_points]

    def bracketed(p0, p1):
        lo, hi = np.minimum(p0, p1) - 1e-9, np.maximum(p0, p1) + 1e-9
        return any(lo[0] <= x <= hi[0] and lo[1] <= y <= hi[1] for x, y in pts)

    n = len(d.eps_a)
    for i in range(n):
        for j in range(n):
            for di, dj in ((1, 0), (0, 1)):
                k, m = i + di, j + dj
                if k >= n or m >= n:
                    continue
                a, b = d.pairs[i, j], d.pairs[k, m]
                if a < 0 or b < 0 or a == b:
                    continue
                if i == j or k == m:  # a cell on the Fano line has one pair fewer
                    continue
                assert bracketed((d.eps_a[i], d.eps_b[j]), (d.eps_a[k], d.eps_b[m])), (i, j, step)


def test_near_fano_line_at_most_one_pair_removed():
    for eA in (0.05, 0.1, 0.2, 0.3):
        on = spectrum(ModelParams.double(eA, eA, 0.1)).n_complex_pairs
        off = spectrum(ModelParams.double(eA + 1e-3, eA - 1e-3, 0.1)).n_complex_pairs
        assert on <= 1 and off - on == 1


def test_stable_corner():
    d = phase_diagram(-0.3, -0.25, -0.3, -0.25, 6, 6, 0.1, "1d")
    assert np.all(d.pairs == 0) and d.ep_points == []


def test_3d_diagram_follows_single_state_line():
    d = phase_diagram(-0.3, 0.3, -0.3, 0.3, 25, 25, 0.1, "3d")
    ref = ep_single_closed_form(0.1, Medium.THREE_D).eps_a
    far = [e for _, line in d.ep_curves for e in line if abs(e.eps_b) > 0.2]
    assert far and all(abs(e.eps_a - ref) < 0.01 for e in far)
    assert d.meeting_point is not None and d.meeting_point.curve_id is CurveId.CURVE1


@pytest.mark.parametrize("medium", ["1d", "3d"])
@pytest.mark.parametrize("eA", [-0.3, 0.05, 0.2, 0.5])
def test_bic(eA, medium):
    r = bic_check(eA, 0.1, medium)
    assert r.is_bic and r.f_rel <= 1e-12 and r.fprime_rel <= 1e-12


def test_bic_perturbed_and_unequal():
    r = bic_check(0.2, 0.1, "1d", eps_D=0.05)
    assert not r.is_bic and r.f_rel > 1e-6
    with pytest.raises(ValueError):
        bic_check(0.2, 0.1, alpha_b=0.2)


def test_resultant_sign_flips_at_ep():
    p = ModelParams.double(0.0, 0.2, 0.1)
    assert discriminant_resultant(p.replace(eps_a=-0.11)) * discriminant_resultant(p.replace(eps_a=-0.09)) < 0

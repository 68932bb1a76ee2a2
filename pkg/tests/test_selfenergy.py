import cmath
import math

import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from fanoep.model import Medium
from fanoep.selfenergy import (QuadratureError, SheetBranch, coefficients, sheet_sqrt,
                               sigma_closed, sigma_quadrature)
from oracles import sigma_1d_first_sheet, sigma_3d_first_sheet

media = st.sampled_from([Medium.ONE_D, Medium.THREE_D])
plane = st.complex_numbers(max_magnitude=2.0, allow_nan=False, allow_infinity=False)


def test_coefficients():
    c = coefficients(Medium.ONE_D)
    assert (c.c0, c.c1, c.eta) == (1.0, -0.5j * math.pi, -0.5)
    c = coefficients(Medium.THREE_D)
    assert (c.c0, c.c1, c.eta) == (-math.pi, -0.5j * math.pi**2, 0.5)


def test_closed_form_examples():
    s = sigma_closed(-0.01, SheetBranch.PLUS, Medium.ONE_D)
    assert s.imag == 0 and s.real == pytest.approx(1 - math.pi / 0.2, rel=1e-14)
    s = sigma_closed(0.25, SheetBranch.MINUS, Medium.THREE_D)
    assert s == pytest.approx(-math.pi + 1j * math.pi**2 / 4, rel=1e-14)


def test_branch_point_rejected():
    with pytest.raises(ValueError):
        sigma_closed(0.0)
    with pytest.raises(ValueError):
        sigma_closed(np.array([0.1, 0.0]))


def test_vectorised():
    z = np.array([-0.01, 0.3 + 0.1j])
    out = sigma_closed(z)
    assert out.shape == (2,)
    assert out[1] == sigma_closed(z[1])


def test_sheet_sqrt_upper_half():
    assert sheet_sqrt(-4.0) == 2j
    assert sheet_sqrt(4.0 - 1e-300j).imag >= 0
    assert sheet_sqrt(1j) == pytest.approx(cmath.sqrt(1j))


@given(plane, media)
def test_branch_sum(z, medium):
    assume(abs(z) > 1e-6)
    total = sigma_closed(z, SheetBranch.PLUS, medium) + sigma_closed(z, SheetBranch.MINUS, medium)
    assert abs(total - 2 * coefficients(medium).c0) < 1e-12


@given(plane, media)
def test_schwarz_reflection_first_sheet(z, medium):
    assume(abs(z.imag) > 1e-9 or z.real < -1e-9)
    a = sigma_closed(z.conjugate(), SheetBranch.PLUS, medium)
    b = sigma_closed(z, SheetBranch.PLUS, medium).conjugate()
    assert abs(a - b) <= 1e-12 * max(1.0, abs(b))


@given(st.floats(0.0101, 0.4999))
def test_jump_across_cut(eps):
    d = 1e-10
    jump = sigma_closed(complex(eps, d)) - sigma_closed(complex(eps, -d))
    assert abs(jump - (-1j * math.pi / math.sqrt(eps))) < 1e-6


@pytest.mark.parametrize("z, expected", [
    (-0.01, -(1 / 0.1) * math.atan(1 / 0.1)),
    (-1.0, -math.pi / 4),
])
def test_quadrature_arctan_oracle_1d(z, expected):
    assert sigma_quadrature(z, Medium.ONE_D) == pytest.approx(expected, abs=1e-9)
    assert sigma_quadrature(-0.01).real == pytest.approx(-14.7113, abs=1e-4)


def test_closed_form_is_small_z_only():
    # far from the band edge the closed form drifts away from the integral
    assert sigma_closed(-1.0).real == pytest.approx(1 - math.pi / 2, abs=1e-12)
    assert abs(sigma_closed(-1.0) - sigma_quadrature(-1.0)) > 0.2


@pytest.mark.parametrize("z", [-0.3, -0.02 + 0.01j, 0.4 + 0.05j, 0.9 - 0.2j, -1.5 - 0.7j])
def test_quadrature_matches_antiderivative(z):
    assert sigma_quadrature(z, Medium.ONE_D) == pytest.approx(sigma_1d_first_sheet(z), abs=1e-9)
    assert sigma_quadrature(z, Medium.THREE_D) == pytest.approx(sigma_3d_first_sheet(z), abs=1e-9)


def test_quadrature_small_z_agreement():
    z = -1e-4
    q, c = sigma_quadrature(z), sigma_closed(z)
    assert abs(q - c) / abs(c) < 2e-3


def test_quadrature_upper_half_plane_is_first_sheet():
    z = 0.04 + 0.001j
    q = sigma_quadrature(z)
    assert abs(q - sigma_closed(z, SheetBranch.PLUS)) < abs(q - sigma_closed(z, SheetBranch.MINUS))


@pytest.mark.parametrize("z", [0.5, 0.5 + 1e-7j, 0.0, 1.0])
def test_quadrature_rejects_cut(z):
    with pytest.raises(ValueError):
        sigma_quadrature(z)


def test_quadrature_reports_non_convergence():
    with pytest.raises(QuadratureError):
        sigma_quadrature(0.3 + 2e-6j, tol=1e-16)

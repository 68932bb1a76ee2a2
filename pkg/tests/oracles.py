"""Reference computations that do not go through the package's polynomial code."""
import math

import mpmath
import sympy as sp


def symbolic_dispersion(eps_a, eps_b, alpha_a, alpha_b, medium, single=False):
    """Rationalise det(H_eff - z) by multiplying the two sheet values together.

    sigma = c0 + s*c1*r with r = z**(-1/2) (1D) or z**(1/2) (3D) and s = +-1.
    The product over s is even in r; substituting r**2 and clearing the
    1/z of the 1D case gives a polynomial in z.  Returns exact sympy
    coefficients, constant term first.
    """
    z, r = sp.symbols("z r")
    if medium == "1d":
        c0, c1, r2 = 1, -sp.I * sp.pi / 2, 1 / z
    else:
        c0, c1, r2 = -sp.pi, -sp.I * sp.pi**2 / 2, z
    ea, eb = sp.nsimplify(eps_a), sp.nsimplify(eps_b)
    aa, ab = sp.nsimplify(alpha_a), sp.nsimplify(alpha_b)

    def det(sign):
        sig = c0 + sign * c1 * r
        if single:
            return ea + aa**2 * sig - z
        return sp.Matrix([[ea + aa**2 * sig - z, aa * ab * sig],
                          [aa * ab * sig, eb + ab**2 * sig - z]]).det()

    prod = sp.expand(det(1) * det(-1))
    prod = sp.expand(prod.subs(r**2, r2))
    assert not prod.has(r)
    if medium == "1d":
        prod = sp.expand(prod * z)
    poly = sp.Poly(sp.simplify(prod), z)
    return [c for c in reversed(poly.all_coeffs())]


def expanded_two_level_1d(eps_a, eps_b, alpha_a, alpha_b):
    """Coefficients of the fully expanded 1D two-level dispersion polynomial."""
    z = sp.symbols("z")
    ea, eb = sp.nsimplify(eps_a), sp.nsimplify(eps_b)
    a2, b2 = sp.nsimplify(alpha_a) ** 2, sp.nsimplify(alpha_b) ** 2
    f = (4 * z * ((z - ea - a2) * (z - eb - b2) - a2 * b2) ** 2
         + sp.pi**2 * ((a2 + b2) * z - (b2 * ea + a2 * eb)) ** 2)
    return [c for c in reversed(sp.Poly(sp.expand(f), z).all_coeffs())]


def bisect_real_roots(f, lo, hi, n=20000, tol=1e-15):
    """All sign changes of ``f`` on a uniform grid, refined by bisection."""
    xs = [lo + (hi - lo) * k / n for k in range(n + 1)]
    vals = [f(x) for x in xs]
    out = []
    for k in range(n):
        if vals[k] == 0:
            out.append(xs[k])
        elif vals[k] * vals[k + 1] < 0:
            a, b, fa = xs[k], xs[k + 1], vals[k]
            while b - a > tol * max(1.0, abs(a)):
                m = 0.5 * (a + b)
                fm = f(m)
                if fm == 0:
                    a = b = m
                    break
                if (fm < 0) == (fa < 0):
                    a, fa = m, fm
                else:
                    b = m
            out.append(0.5 * (a + b))
    return out


def sigma_1d_first_sheet(z):
    """int_0^1 dk / (z - k^2) = -(1/a) arctan(1/a), a = sqrt(-z); valid off [0, inf)."""
    a = mpmath.sqrt(-mpmath.mpc(z))
    return complex(-(1 / a) * mpmath.atan(1 / a))


def sigma_3d_first_sheet(z):
    """pi int_0^1 k^2 dk / (z - k^2) = -pi (1 - a arctan(1/a)), a = sqrt(-z)."""
    a = mpmath.sqrt(-mpmath.mpc(z))
    return complex(-mpmath.pi * (1 - a * mpmath.atan(1 / a)))


def single_ep_1d(alpha):
    w = (math.pi * alpha**2 / 4) ** (2 / 3)
    return -3 * w - alpha**2, -w

"""Semi-analytic radial integrals through incomplete gamma functions.

Outgoing spherical Hankel functions are ``exp(i x)`` times a polynomial in
``1/x``, so every damped single integral reduces to

    int_c^inf x^(-k) exp(-s x) dx = s^(k-1) Gamma(1-k, s c),   Re s > 0,

evaluated in extended precision.  Nested integrals keep one quadrature
(over the inner radius) and treat the outer tail in closed form.  This
module is an independent cross-check of :mod:`localfield.radial`.
"""

from __future__ import annotations

import math

import mpmath as mp
import numpy as np
from scipy import integrate

__all__ = [
    "hankel_poly",
    "tail_integral",
    "single_integral",
    "nested_integral",
    "nested_integral_l0_inner",
]

# h_l(x) = exp(i x) * sum_n c[n] x^(-n)
_HANKEL = {
    0: {1: -1j},
    1: {2: -1j, 1: -1},
    2: {1: 1j, 2: -3, 3: -3j},
}


def hankel_poly(l):
    """Coefficients ``{n: c_n}`` of ``h_l(x) exp(-i x) = sum c_n x^(-n)``."""
    return dict(_HANKEL[l])


def _mul(p, q):
    out = {}
    for a, ca in p.items():
        for b, cb in q.items():
            out[a + b] = out.get(a + b, 0) + ca * cb
    return out


def _gamma_table(amin, amax, z):
    """``{a: Gamma(a, z)}`` for integers ``amin <= a <= amax``, from one ``E1``."""
    ez = mp.exp(-z)
    table = {}
    g = mp.e1(z)
    if amin <= 0:
        table[0] = g
        for b in range(-1, amin - 1, -1):
            g = (g - z**b * ez) / b
            table[b] = g
    g = ez
    for b in range(1, amax + 1):
        table[b] = g
        g = b * g + z**b * ez
    return table


def tail_integral(poly, power, freq, eps, c):
    """``int_c^inf x^power exp(i freq x) exp(-eps x) sum_n poly[n] x^(-n) dx``.

    Each monomial gives ``s^(k-1) Gamma(1-k, s c)`` with ``k = n - power`` and
    ``s = eps - i freq``.
    """
    s = mp.mpf(eps) - 1j * freq
    ks = [n - power for n in poly]
    if c == 0:
        if max(ks) >= 1:
            raise ValueError("divergent at the origin")
        return mp.fsum(mp.mpc(poly[k + power]) * mp.factorial(-k) / s ** (1 - k) for k in ks)
    table = _gamma_table(min(1 - k for k in ks), max(1 - k for k in ks), s * c)
    return mp.fsum(mp.mpc(poly[k + power]) * s ** (k - 1) * table[1 - k] for k in ks)


def single_integral(la, lb, eps, cutoff, dps=60):
    """``int_cutoff^inf rho^2 h_la h_lb exp(-eps rho) d rho`` in closed form.

    Terms of size ``cutoff^-4`` cancel, so the working precision is raised
    with ``-log10(cutoff)``.
    """
    if cutoff > 0:
        dps = max(dps, int(30 - 5 * math.log10(cutoff)))
    with mp.workdps(dps):
        poly = _mul(_HANKEL[la], _HANKEL[lb])
        return complex(tail_integral(poly, 2, 2, eps, mp.mpf(cutoff)))


def nested_integral_l0_inner(lo, eps, cutoff, dps=60):
    """``J(lo, 0; eps)`` with outer lower limit ``cutoff``, fully closed form.

    Uses ``int_0^x t^2 h_0 j_0 dt = x/2 + (i/4)(exp(2 i x) - 1)``.
    """
    with mp.workdps(dps):
        c = mp.mpf(cutoff)
        outer = _mul(_HANKEL[lo], _HANKEL[lo])
        total = tail_integral(outer, 3, 2, eps, c) / 2
        total += -0.25j * tail_integral(outer, 2, 2, eps, c)
        total += 0.25j * tail_integral(outer, 2, 4, eps, c)
        return complex(total)


def nested_integral(lo, li, eps, dps=30, start=1e-7, width=2.0, part="real"):
    """``J(lo, li; eps)`` via one quadrature over the inner radius.

    Swapping the order of integration gives
    ``int_0^inf dt t^2 h_li(t) j_li(t) T(t)`` with the closed-form tail
    ``T(t) = int_t^inf rho^2 h_lo^2 exp(-eps rho) d rho``.  The integrand
    vanishes at least linearly at the origin, so the piece below ``start``
    is dropped.  The remaining one-dimensional integral uses QUADPACK on
    unit-scale subintervals.

    Parameters
    ----------
    part : {"real", "imag"}
        Which part of the complex integral to return.
    """
    outer = _mul(_HANKEL[lo], _HANKEL[lo])
    hpoly = _HANKEL[li]
    pick = (lambda z: z.real) if part == "real" else (lambda z: z.imag)

    def integrand(t):
        with mp.workdps(dps):
            tm = mp.mpf(t)
            h = mp.exp(1j * tm) * mp.fsum(mp.mpc(cn) * tm ** (-n) for n, cn in hpoly.items())
            j = _series_j(li, tm) if t < 0.5 else mp.re(h)
            return pick(complex(tm * tm * h * j * tail_integral(outer, 2, 2, eps, tm)))

    upper = 45.0 / eps
    pts = [start, 0.5] + list(np.arange(1.0, upper, width)) + [upper]
    total = 0.0
    for a, b in zip(pts[:-1], pts[1:]):
        val, _ = integrate.quad(integrand, a, b, epsabs=1e-13, epsrel=1e-12, limit=200)
        total += val
    return total


def _series_j(l, x):
    # x^l sum_k (-x^2/2)^k / (k! (2l+2k+1)!!)
    term = mp.mpf(1) / mp.fac2(2 * l + 1)
    acc = term
    z = -x * x / 2
    for k in range(1, 40):
        term = term * z / (k * (2 * l + 2 * k + 1))
        acc += term
    return acc * x ** l

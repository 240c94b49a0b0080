"""Special functions: spherical Bessel/Hankel functions, spherical harmonics
and Wigner 3-j symbols.

Conventions
-----------
Spherical harmonics use the Condon-Shortley phase with orthonormal
normalization, so that ``conj(Y[l, m]) == (-1)**m * Y[l, -m]``.  Every
angular reduction in the package (3-j contractions, Gaunt integrals,
two-center expansions) assumes this convention.

Orders ``l <= 2`` use closed rational-trigonometric forms with a power
series below ``x = 0.5``; higher orders fall back to :mod:`scipy.special`.
All functions broadcast over array arguments in ``x`` (and angles).
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import factorial, sqrt, pi

import numpy as np
from scipy import special as _sp

from .errors import DomainError, UnsupportedOrderError

__all__ = [
    "AngularIndex",
    "spherical_bessel_j",
    "spherical_bessel_y",
    "spherical_hankel_h1",
    "spherical_harmonic",
    "wigner_3j",
    "wigner_3j_exact",
    "gaunt",
    "MAX_ORDER",
]

#: Largest order accepted by the Bessel family.
MAX_ORDER = 80

_SERIES_SWITCH = 0.5
_SERIES_TERMS = 12


class AngularIndex(tuple):
    """Pair ``(l, m)`` with ``l >= 0`` and ``|m| <= l``."""

    def __new__(cls, l, m):
        l, m = int(l), int(m)
        if l < 0 or abs(m) > l:
            raise DomainError(f"invalid angular index (l={l}, m={m})")
        return super().__new__(cls, (l, m))

    @property
    def l(self):
        return self[0]

    @property
    def m(self):
        return self[1]


def _check_order(l):
    if isinstance(l, bool) or int(l) != l or l < 0:
        raise UnsupportedOrderError(f"order must be a non-negative integer, got {l!r}")
    if l > MAX_ORDER:
        raise UnsupportedOrderError(f"order {l} exceeds supported maximum {MAX_ORDER}")
    return int(l)


def _double_factorial_odd(n):
    # (2n+1)!!
    out = 1
    for k in range(3, 2 * n + 2, 2):
        out *= k
    return out


def _bessel_series(l, x):
    """Power series ``x^l sum_k (-x^2/2)^k / (k! (2l+2k+1)!!)``."""
    x = np.asarray(x, dtype=float)
    z = -0.5 * x * x
    term = np.full_like(x, 1.0 / _double_factorial_odd(l))
    acc = term.copy()
    for k in range(1, _SERIES_TERMS):
        term = term * z / (k * (2 * l + 2 * k + 1))
        acc = acc + term
    return acc * x**l


def _closed_j(l, x):
    s, c = np.sin(x), np.cos(x)
    if l == 0:
        return s / x
    if l == 1:
        return s / x**2 - c / x
    return (3.0 / x**3 - 1.0 / x) * s - 3.0 * c / x**2


def _closed_y(l, x):
    s, c = np.sin(x), np.cos(x)
    if l == 0:
        return -c / x
    if l == 1:
        return -c / x**2 - s / x
    return (-3.0 / x**3 + 1.0 / x) * c - 3.0 * s / x**2


def spherical_bessel_j(l, x):
    """Spherical Bessel function of the first kind ``j_l(x)``.

    Parameters
    ----------
    l : int
        Order, ``0 <= l <= MAX_ORDER``.
    x : float or array_like
        Non-negative argument.

    Returns
    -------
    float or ndarray
    """
    l = _check_order(l)
    xa = np.asarray(x, dtype=float)
    if np.any(xa < 0):
        raise DomainError("spherical_bessel_j requires x >= 0")
    if l > 2:
        out = _sp.spherical_jn(l, xa)
    else:
        small = xa < _SERIES_SWITCH
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.where(small, _bessel_series(l, xa), _closed_j(l, np.where(small, 1.0, xa)))
    return out[()] if out.ndim == 0 else out


def spherical_bessel_y(l, x):
    """Spherical Bessel function of the second kind ``y_l(x)`` for ``x > 0``."""
    l = _check_order(l)
    xa = np.asarray(x, dtype=float)
    if np.any(xa <= 0):
        raise DomainError("spherical_bessel_y requires x > 0")
    out = _closed_y(l, xa) if l <= 2 else _sp.spherical_yn(l, xa)
    return out[()] if out.ndim == 0 else out


def spherical_hankel_h1(l, x):
    """Outgoing spherical Hankel function ``h_l(x) = j_l(x) + i y_l(x)``.

    Raises
    ------
    DomainError
        If any ``x <= 0``.
    """
    l = _check_order(l)
    xa = np.asarray(x, dtype=float)
    if np.any(xa <= 0):
        raise DomainError("spherical_hankel_h1 requires x > 0")
    out = spherical_bessel_j(l, xa) + 1j * spherical_bessel_y(l, xa)
    return out[()] if np.ndim(out) == 0 else out


def spherical_harmonic(l, m, theta, phi):
    """Orthonormal spherical harmonic ``Y_lm(theta, phi)``, Condon-Shortley phase.

    Parameters
    ----------
    l, m : int
        Degree and order with ``|m| <= l``.
    theta : float or array_like
        Polar angle in radians.
    phi : float or array_like
        Azimuth in radians.
    """
    l = _check_order(l)
    if int(m) != m or abs(m) > l:
        raise DomainError(f"|m| must not exceed l (l={l}, m={m})")
    out = _sp.sph_harm_y(l, int(m), theta, phi)
    return out[()] if np.ndim(out) == 0 else out


# --- Wigner 3-j ---------------------------------------------------------------

def _triangle(a, b, c):
    return abs(a - b) <= c <= a + b


@lru_cache(maxsize=None)
def wigner_3j_exact(l1, l2, l3, m1, m2, m3):
    """Wigner 3-j symbol as ``(sign, Fraction)`` with value ``sign * sqrt(Fraction)``.

    Exact Racah sum on integers.  Returns ``(0, Fraction(0))`` when a
    selection rule forbids the coupling.
    """
    l1, l2, l3, m1, m2, m3 = (int(v) for v in (l1, l2, l3, m1, m2, m3))
    if min(l1, l2, l3) < 0 or m1 + m2 + m3 != 0 or not _triangle(l1, l2, l3):
        return 0, Fraction(0)
    if abs(m1) > l1 or abs(m2) > l2 or abs(m3) > l3:
        return 0, Fraction(0)
    if m1 == m2 == m3 == 0 and (l1 + l2 + l3) % 2:
        return 0, Fraction(0)

    f = factorial
    delta = Fraction(f(l1 + l2 - l3) * f(l1 - l2 + l3) * f(-l1 + l2 + l3), f(l1 + l2 + l3 + 1))
    pref = delta * (
        f(l1 + m1) * f(l1 - m1) * f(l2 + m2) * f(l2 - m2) * f(l3 + m3) * f(l3 - m3)
    )
    kmin = max(0, l2 - l3 - m1, l1 - l3 + m2)
    kmax = min(l1 + l2 - l3, l1 - m1, l2 + m2)
    total = Fraction(0)
    for k in range(kmin, kmax + 1):
        den = (
            f(k) * f(l1 + l2 - l3 - k) * f(l1 - m1 - k) * f(l2 + m2 - k)
            * f(l3 - l2 + m1 + k) * f(l3 - l1 - m2 + k)
        )
        total += Fraction((-1) ** k, den)
    if total == 0:
        return 0, Fraction(0)
    sign = (-1) ** (l1 - l2 - m3) * (1 if total > 0 else -1)
    return sign, pref * total * total


def wigner_3j(l1, l2, l3, m1, m2, m3):
    """Wigner 3-j symbol ``(l1 l2 l3; m1 m2 m3)`` as a float (0 when forbidden)."""
    sign, sq = wigner_3j_exact(l1, l2, l3, m1, m2, m3)
    if sign == 0:
        return 0.0
    return sign * sqrt(sq)


def gaunt(l1, l2, l3, m1, m2, m3):
    """Integral of ``Y_{l1 m1} Y_{l2 m2} Y_{l3 m3}`` over the unit sphere."""
    a = wigner_3j(l1, l2, l3, 0, 0, 0)
    if a == 0.0:
        return 0.0
    b = wigner_3j(l1, l2, l3, m1, m2, m3)
    return sqrt((2 * l1 + 1) * (2 * l2 + 1) * (2 * l3 + 1) / (4 * pi)) * a * b

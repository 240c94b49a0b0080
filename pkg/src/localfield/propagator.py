"""Sublevel-resolved dipole propagators ``G[m, m'](R)``.

The propagator between dipole transitions ``m`` and ``m'`` at separation
``R`` (dimensionless radius ``rho = k0 |R|``) is a finite multipole sum

    G[m, m'](R) = sum_(l, mu) a[l, mu] * h_l(rho) * Y[l, mu](R_hat)

with ``l`` in ``{0, 2}``.  Replacing ``h_l`` by ``j_l`` gives the standing-wave
kernel obtained from the transverse polarization sum over photon directions;
:func:`angular_kernel` evaluates that integral numerically as a witness.

Spherical basis vectors are ``e[+1] = -(x + iy)/sqrt(2)``, ``e[0] = z`` and
``e[-1] = (x - iy)/sqrt(2)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import pi, sqrt
from typing import Iterator

import numpy as np

from .errors import DomainError, ExpansionUndefinedError, SingularityError
from .specfun import spherical_bessel_j, spherical_hankel_h1, spherical_harmonic, wigner_3j

__all__ = [
    "Channel",
    "Displacement",
    "CHANNELS",
    "multipole_coefficients",
    "propagator_element",
    "propagator_matrix",
    "angular_kernel",
    "translate_product",
    "bipolar_coefficient",
    "spherical_basis",
]

SUBLEVELS = (-1, 0, 1)


@dataclass(frozen=True)
class Channel:
    """Ordered pair of magnetic sublevels ``(m_from, m_to)``."""

    m_from: int
    m_to: int

    def __post_init__(self):
        for v in (self.m_from, self.m_to):
            if v not in SUBLEVELS:
                raise DomainError(f"sublevel must be one of -1, 0, 1 (got {v!r})")

    @classmethod
    def parse(cls, text: str) -> "Channel":
        """Build from a string such as ``"1,-1"``."""
        try:
            a, b = (int(s) for s in text.replace(" ", "").split(","))
        except ValueError as exc:
            raise DomainError(f"cannot parse channel {text!r}") from exc
        return cls(a, b)

    def __iter__(self) -> Iterator[int]:
        return iter((self.m_from, self.m_to))

    def __str__(self):
        return f"({self.m_from},{self.m_to})"


CHANNELS = tuple(Channel(a, b) for a in SUBLEVELS for b in SUBLEVELS)


@dataclass(frozen=True)
class Displacement:
    """Separation vector in dimensionless spherical coordinates.

    Parameters
    ----------
    rho : float
        ``k0 * |R|``.
    theta, phi : float
        Polar and azimuthal angles of ``R`` in radians.
    """

    rho: float
    theta: float = 0.0
    phi: float = 0.0

    @classmethod
    def from_cartesian(cls, vec, k0: float = 1.0) -> "Displacement":
        x, y, z = (float(c) * k0 for c in vec)
        rho = float(np.sqrt(x * x + y * y + z * z))
        if rho == 0.0:
            return cls(0.0, 0.0, 0.0)
        return cls(rho, float(np.arccos(np.clip(z / rho, -1.0, 1.0))), float(np.arctan2(y, x)))

    def cartesian(self) -> np.ndarray:
        st = np.sin(self.theta)
        return self.rho * np.array(
            [st * np.cos(self.phi), st * np.sin(self.phi), np.cos(self.theta)]
        )


def _as_disp(d) -> Displacement:
    return d if isinstance(d, Displacement) else Displacement.from_cartesian(d)


# Closed forms for the six independent channels: {(l, mu): coefficient}.
_BASE = {
    (1, 1): {(0, 0): sqrt(4 * pi), (2, 0): -0.5 * sqrt(4 * pi / 5)},
    (0, 0): {(0, 0): sqrt(4 * pi), (2, 0): sqrt(4 * pi / 5)},
    (1, -1): {(2, -2): -1.5 * sqrt(8 * pi / 15)},
    (-1, 1): {(2, 2): -1.5 * sqrt(8 * pi / 15)},
    (1, 0): {(2, -1): -1.5 * sqrt(4 * pi / 15)},
    (-1, 0): {(2, 1): -1.5 * sqrt(4 * pi / 15)},
}
# Remaining channels: (target, source, sign).
_DERIVED = {(-1, -1): ((1, 1), 1.0), (0, -1): ((1, 0), -1.0), (0, 1): ((-1, 0), -1.0)}


def multipole_coefficients(ch: Channel) -> dict[tuple[int, int], float]:
    """Coefficients ``a[l, mu]`` of ``G[ch] = sum a h_l Y[l, mu]``."""
    key = (ch.m_from, ch.m_to)
    if key in _BASE:
        return dict(_BASE[key])
    src, sign = _DERIVED[key]
    return {lm: sign * c for lm, c in _BASE[src].items()}


def _radial(l, rho, kind):
    if kind == "h":
        return spherical_hankel_h1(l, rho)
    if kind == "j":
        return spherical_bessel_j(l, rho)
    raise DomainError(f"radial kind must be 'h' or 'j', got {kind!r}")


def _element(key, rho, theta, phi, kind):
    coeffs = _BASE[key]
    return sum(c * _radial(l, rho, kind) * spherical_harmonic(l, mu, theta, phi)
               for (l, mu), c in coeffs.items())


def propagator_element(ch: Channel, disp, *, radial: str = "h") -> complex:
    """Closed-form propagator ``G[ch](R)``.

    Parameters
    ----------
    ch : Channel
    disp : Displacement or array_like
        Separation; a 3-vector is interpreted in units with ``k0 = 1``.
    radial : {"h", "j"}
        ``"h"`` gives the outgoing-wave propagator; ``"j"`` the standing-wave
        kernel (finite at the origin).

    Raises
    ------
    SingularityError
        If ``rho == 0`` with outgoing radial functions.
    """
    d = _as_disp(disp)
    if d.rho <= 0.0 and radial == "h":
        raise SingularityError("propagator is singular at zero separation")
    key = (ch.m_from, ch.m_to)
    if key in _DERIVED:
        src, sign = _DERIVED[key]
        return complex(sign * _element(src, d.rho, d.theta, d.phi, radial))
    return complex(_element(key, d.rho, d.theta, d.phi, radial))


def propagator_matrix(rho, theta, phi) -> np.ndarray:
    """All nine outgoing propagators, vectorized.

    Returns an array of shape ``rho.shape + (3, 3)`` indexed by
    ``[..., m + 1, m' + 1]``.
    """
    rho = np.asarray(rho, dtype=float)
    if np.any(rho <= 0):
        raise SingularityError("propagator is singular at zero separation")
    h0 = spherical_hankel_h1(0, rho)
    h2 = spherical_hankel_h1(2, rho)
    y = {mu: spherical_harmonic(2, mu, theta, phi) for mu in range(-2, 3)}
    y00 = 1.0 / sqrt(4 * pi)
    out = np.empty(rho.shape + (3, 3), dtype=complex)
    vals = {}
    for key, coeffs in _BASE.items():
        acc = 0.0
        for (l, mu), c in coeffs.items():
            acc = acc + c * (h0 * y00 if l == 0 else h2 * y[mu])
        vals[key] = acc
    for key, (src, sign) in _DERIVED.items():
        vals[key] = sign * vals[src]
    for (a, b), v in vals.items():
        out[..., a + 1, b + 1] = v
    return out


def spherical_basis(m: int) -> np.ndarray:
    """Spherical unit vector ``e[m]`` as a complex Cartesian 3-vector."""
    s = 1.0 / sqrt(2.0)
    if m == 1:
        return np.array([-s, -1j * s, 0.0])
    if m == 0:
        return np.array([0.0, 0.0, 1.0], dtype=complex)
    if m == -1:
        return np.array([s, -1j * s, 0.0])
    raise DomainError(f"sublevel must be one of -1, 0, 1 (got {m!r})")


def angular_kernel(ch: Channel, disp, grid_order: int | None = None) -> complex:
    """Standing-wave propagator from a direct photon-direction integral.

    Evaluates ``(3 / 8 pi) * int dOmega_k sum_lambda conj(eps_m) eps_m' exp(i k.R)``
    on a product Gauss-Legendre (polar) by trapezoid (azimuth) grid, with the
    two transverse polarizations ``theta_hat`` and ``phi_hat`` of ``k``.

    Parameters
    ----------
    grid_order : int, optional
        Number of polar nodes (azimuth uses twice as many).  The plane wave
        is not band-limited, so the default grows with ``rho``.
    """
    d = _as_disp(disp)
    if grid_order is None:
        grid_order = max(16, int(d.rho) + 24)
    if grid_order < 8:
        raise DomainError("grid_order must be at least 8")
    x, w = np.polynomial.legendre.leggauss(grid_order)
    nphi = 2 * grid_order
    phk = 2 * pi * np.arange(nphi) / nphi
    th = np.arccos(x)[:, None]
    ph = phk[None, :]
    st, ct, sp, cp = np.sin(th), np.cos(th), np.sin(ph), np.cos(ph)
    khat = np.stack(np.broadcast_arrays(st * cp, st * sp, ct), axis=-1)
    e_theta = np.stack(np.broadcast_arrays(ct * cp, ct * sp, -st), axis=-1)
    e_phi = np.stack(np.broadcast_arrays(-sp, cp, 0.0 * ct), axis=-1)
    em, emp = spherical_basis(ch.m_from), spherical_basis(ch.m_to)
    pol = 0.0
    for eps in (e_theta, e_phi):
        pol = pol + np.conj(eps @ em) * (eps @ emp)
    phase = np.exp(1j * (khat @ d.cartesian()))
    integrand = pol * phase
    total = (w[:, None] * integrand).sum() * (2 * pi / nphi)
    return complex(3.0 / (8 * pi) * total)


def bipolar_coefficient(l1: int, l2: int, m1: int, m2: int, l: int, m: int) -> complex:
    """Weight of ``h_l1 j_l2 Y[l1, m1] Y[l2, m2]`` in the two-center expansion of ``h_l Y[l, m]``.

    Zero unless ``m1 + m2 == m`` and the 3-j selection rules hold.
    """
    if m1 + m2 != m or abs(m1) > l1 or abs(m2) > l2:
        return 0.0
    c0 = wigner_3j(l1, l, l2, 0, 0, 0)
    if c0 == 0.0:
        return 0.0
    c1 = wigner_3j(l1, l, l2, m1, -m, m2)
    return ((1j ** (l1 + l2 - l)) * (-1) ** (l2 + m)
            * sqrt(4 * pi * (2 * l + 1) * (2 * l1 + 1) * (2 * l2 + 1)) * c0 * c1)


def translate_product(l: int, m: int, r1, r2, l_max: int) -> complex:
    """Two-center expansion of ``h_l(|R2 - R1|) Y[l, m](unit(R2 - R1))``.

    Sums the bipolar series over ``l1, l2 <= l_max`` with outgoing functions
    of the larger radius and regular functions of the smaller one.  The
    second 3-j symbol couples ``(m1, -m, m2)``, so ``m1 + m2 = m``.

    Parameters
    ----------
    l, m : int
        Multipole of the translated function.
    r1, r2 : Displacement or array_like
        Expansion points (units with ``k0 = 1``).
    l_max : int
        Truncation order, at least ``l + 2``.

    Raises
    ------
    ExpansionUndefinedError
        If ``|R1| == |R2|``.
    """
    a, b = _as_disp(r1), _as_disp(r2)
    if l_max < l + 2:
        raise DomainError("l_max must be at least l + 2")
    if np.isclose(a.rho, b.rho, rtol=0.0, atol=1e-14 * max(1.0, a.rho)):
        raise ExpansionUndefinedError("expansion undefined for equal radii")
    if b.rho > a.rho:
        big, small, parity = b, a, 1.0
    else:
        big, small, parity = a, b, (-1.0) ** l
    total = 0.0 + 0.0j
    for l1 in range(l_max + 1):
        hb = spherical_hankel_h1(l1, big.rho)
        for l2 in range(abs(l1 - l), min(l1 + l, l_max) + 1, 2):
            js = spherical_bessel_j(l2, small.rho)
            for m1 in range(-l1, l1 + 1):
                m2 = m - m1
                c = bipolar_coefficient(l1, l2, m1, m2, l, m)
                if c == 0.0:
                    continue
                total += (c * hb * js
                          * spherical_harmonic(l1, m1, big.theta, big.phi)
                          * spherical_harmonic(l2, m2, small.theta, small.phi))
    return complex(parity * total)

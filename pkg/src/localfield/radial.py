"""Damped radial integrals by composite Gauss-Legendre quadrature.

Two families of integrals appear once the angular parts are done:

single  ``K(La, Lb; eps) = int_0^inf rho^2 h_La h_Lb exp(-eps rho) d rho``

nested  ``J(Lo, Li; eps) = int_0^inf d rho exp(-eps rho) rho^2 h_Lo(rho)^2
                            * int_0^rho d t t^2 h_Li(t) j_Li(t)``

``Lo`` labels the factor living at the larger radius.  Both are Abel
regularized: evaluated at finite ``eps`` and extrapolated to zero.

Panels are geometric near the origin (integrable singular behaviour) and of
unit width further out, which resolves the ``exp(4 i rho)`` oscillation.
"""

from __future__ import annotations

from functools import lru_cache
from math import ceil

import numpy as np

from .errors import DomainError, UnsupportedOrderError
from .specfun import spherical_bessel_j, spherical_bessel_y

__all__ = [
    "panel_edges",
    "single_integral",
    "nested_integral",
    "combined_log_pair",
]

_SUPPORTED = (0, 2)


@lru_cache(maxsize=8)
def _gauss(n):
    x, w = np.polynomial.legendre.leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def panel_edges(rho_min, rho_max, width=1.0, n_geometric=40):
    """Panel boundaries on ``[rho_min, rho_max]``.

    Geometric halving towards ``rho_min`` below ``rho = 1`` (or a single
    panel when ``rho_min > 0`` is close to 1), uniform beyond.
    """
    if rho_max <= rho_min:
        raise DomainError("rho_max must exceed rho_min")
    start = max(rho_min, 0.0)
    head = []
    if start < 1.0:
        g = [2.0 ** -k for k in range(n_geometric, -1, -1)]
        head = [start] + [v for v in g if v > start * (1 + 1e-12)]
        tail_start = 1.0
    else:
        tail_start = start
    n = max(1, ceil((rho_max - tail_start) / width))
    tail = list(np.linspace(tail_start, rho_max, n + 1))
    edges = np.array(head[:-1] + tail if head else tail)
    return edges


def _hj(l, x):
    """Return ``(j_l(x), y_l(x))`` arrays."""
    return spherical_bessel_j(l, x), spherical_bessel_y(l, x)


def _outer_factor(l, x):
    j, y = _hj(l, x)
    return x * x * (j * j - y * y + 2j * j * y)


def _inner_factor(l, x):
    j, y = _hj(l, x)
    return x * x * (j * j + 1j * j * y)


def _nodes(edges, n):
    u, w = _gauss(n)
    a, b = edges[:-1, None], edges[1:, None]
    half = 0.5 * (b - a)
    return (a + half * (u + 1.0)), half * w


def _check_orders(*ls):
    for l in ls:
        if l not in _SUPPORTED:
            raise UnsupportedOrderError(f"radial integrals support l in {_SUPPORTED}, got {l}")


def single_integral(la, lb, eps, *, rho_max, cutoff=0.0, n=20):
    """``int_cutoff^rho_max rho^2 h_la h_lb exp(-eps rho)`` (complex)."""
    _check_orders(la, lb)
    edges = panel_edges(cutoff, rho_max)
    x, w = _nodes(edges, n)
    ja, ya = _hj(la, x)
    jb, yb = _hj(lb, x)
    f = x * x * ((ja * jb - ya * yb) + 1j * (ja * yb + ya * jb)) * np.exp(-eps * x)
    return complex(np.sum(w * f))


def _inner_cumulative(li, edges, xo, n):
    """``int_0^x t^2 h_li j_li dt`` at every outer node ``xo``."""
    u, w = _gauss(n)
    # Integral up to each panel start: first panel from 0.
    full_edges = edges if edges[0] == 0.0 else np.concatenate(([0.0], edges))
    xt, wt = _nodes(full_edges, n)
    per_panel = np.sum(wt * _inner_factor(li, xt), axis=1)
    cum = np.concatenate(([0.0], np.cumsum(per_panel)))
    offset = 0 if edges[0] == 0.0 else 1
    start = cum[offset:offset + len(edges) - 1][:, None]
    a = edges[:-1, None, None]
    half = 0.5 * (xo[:, :, None] - a)
    t = a + half * (u + 1.0)
    partial = np.sum(half * w * _inner_factor(li, t), axis=2)
    return start + partial


def nested_integral(lo, li, eps, *, rho_max, cutoff=0.0, n=20):
    """Nested damped integral ``J(lo, li; eps)`` with outer lower limit ``cutoff``.

    The inner integral always starts at zero.  Returns a complex number;
    for ``(lo, li) = (2, 0)`` or ``(2, 2)`` the imaginary part diverges as
    ``cutoff -> 0`` and the ``(2, 0)`` real part diverges logarithmically.
    """
    _check_orders(lo, li)
    edges = panel_edges(cutoff, rho_max)
    xo, wo = _nodes(edges, n)
    inner = _inner_cumulative(li, edges, xo, n)
    f = _outer_factor(lo, xo) * inner * np.exp(-eps * xo)
    return complex(np.sum(wo * f))


def combined_log_pair(eps, *, rho_max, n=20):
    """Finite sum ``Re J(2, 0) + Re(i K(0, 2))`` with a common cutoff sent to zero.

    Each piece diverges like ``3 log`` at small radius with opposite sign;
    the pointwise sum of the outer integrands is bounded, so the sum is
    integrated directly from zero.
    """
    edges = panel_edges(0.0, rho_max)
    xo, wo = _nodes(edges, n)
    inner = _inner_cumulative(0, edges, xo, n)
    j0, y0 = _hj(0, xo)
    j2, y2 = _hj(2, xo)
    damp = np.exp(-eps * xo)
    nested = (_outer_factor(2, xo) * inner).real
    shell = -(xo * xo * (j0 * y2 + y0 * j2))  # Re(i z) = -Im z
    return float(np.sum(wo * (nested + shell) * damp))

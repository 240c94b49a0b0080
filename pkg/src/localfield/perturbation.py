"""First- and second-order density corrections to the source decay rate.

First order
    ``Re[i (k0^3 / 6 pi) int d^3R sum_m G[0,m](R) G[m,0](R)]`` per unit ``N alpha``.

Second order, channel ``(m, m')``
    ``Re[-(k0^3 / 6 pi)^2 int int G[0,m](R2) G[m,m'](R2 - R1) G[m',0](R1)]``
    per unit ``(N alpha)^2``.

Angles are integrated analytically.  One propagator of the triple product is
re-expanded about two centers, which leaves weighted sums of the damped
radial integrals of :mod:`localfield.radial`:

``J(Lo, Li)``  nested, ``Lo`` the multipole at the larger radius;
``S(La, Lb) = Re[i int rho^2 h_La h_Lb]``  single, from first order and from
the coincident-point (contact) region.

``J(2, 0)`` and ``S(0, 2)`` diverge logarithmically at small radius with
opposite signs; only their sum is cutoff independent.  The split is fixed by
requiring the principal value of every channel to be independent of which
propagator is re-expanded, which forces ``J(0, 2) + J(2, 0) = 2 J(2, 2)``.
Principal values use this ``J(2, 0)``; contact values absorb the remainder,
so ``principal + contact`` does not depend on the split.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from functools import lru_cache
from math import pi

import numpy as np

from . import radial
from .errors import ConvergenceError, DomainError
from .propagator import CHANNELS, Channel, bipolar_coefficient, multipole_coefficients
from .specfun import gaunt, spherical_hankel_h1

__all__ = [
    "RegularizationPlan",
    "RadialTerm",
    "RadialIntegrals",
    "ChannelCoefficient",
    "extrapolate",
    "radial_integrals",
    "first_order_coefficient",
    "first_order_density",
    "first_order_weights",
    "reduce_channel_to_radial",
    "second_order_channel",
    "channel_imaginary_part",
    "contact_shell_integral",
    "contact_term",
    "channel_coefficient",
    "all_channel_coefficients",
    "total_second_order",
    "TOTAL_WEIGHTS",
]

#: Multiplicity of each representative channel in the full nine-channel sum.
TOTAL_WEIGHTS = {Channel(1, 1): 2, Channel(0, 0): 1, Channel(0, 1): 4, Channel(-1, 1): 2}

_PREFACTOR2 = -1.0 / (36.0 * pi * pi)


@dataclass(frozen=True)
class RegularizationPlan:
    """Convergence-factor ladder and quadrature settings.

    Parameters
    ----------
    epsilons : tuple of float
        Strictly decreasing positive damping rates.
    rho_max : float, optional
        Outer radial cutoff; defaults to ``30 / min(epsilons)``.
    extrapolation_order : int, optional
        Degree of the polynomial in ``eps``; defaults to ``len(epsilons) - 1``.
        ``0`` with a single epsilon returns the damped value itself.
    tolerance : float
        Maximum change of the extrapolated value when the largest epsilon is
        dropped.
    nodes : int
        Gauss-Legendre nodes per panel.
    """

    epsilons: tuple = (0.6, 0.45, 0.3, 0.2, 0.15, 0.1, 0.075, 0.05)
    rho_max: float | None = None
    extrapolation_order: int | None = None
    tolerance: float = 1e-6
    nodes: int = 20

    def __post_init__(self):
        eps = tuple(float(e) for e in self.epsilons)
        if not eps or any(e <= 0 for e in eps):
            raise DomainError("epsilons must be positive")
        if any(b >= a for a, b in zip(eps, eps[1:])):
            raise DomainError("epsilons must be strictly decreasing")
        object.__setattr__(self, "epsilons", eps)
        if self.rho_max is None:
            object.__setattr__(self, "rho_max", 30.0 / eps[-1])
        if self.rho_max * eps[-1] < 25.0:
            raise DomainError("rho_max * min(epsilons) must be at least 25")
        order = len(eps) - 1 if self.extrapolation_order is None else int(self.extrapolation_order)
        if not 0 <= order <= len(eps) - 1:
            raise DomainError("extrapolation_order must lie in [0, len(epsilons) - 1]")
        object.__setattr__(self, "extrapolation_order", order)


def extrapolate(epsilons, values, order, tolerance=np.inf):
    """Polynomial extrapolation of ``values(eps)`` to ``eps = 0``.

    Fits a degree-``order`` polynomial (least squares when over-determined)
    and compares with the fit that omits the largest epsilon.

    Raises
    ------
    ConvergenceError
        If the two estimates differ by more than ``tolerance * max(1, |v|)``.
    """
    x = np.asarray(epsilons, dtype=float)
    y = np.asarray(values, dtype=float)
    if order == 0:
        return float(y[-1])
    est = float(np.polynomial.polynomial.polyfit(x, y, order)[0])
    if len(x) > 2:
        sub = min(order, len(x) - 2)
        alt = float(np.polynomial.polynomial.polyfit(x[1:], y[1:], sub)[0])
        if abs(est - alt) > tolerance * max(1.0, abs(est)):
            raise ConvergenceError(
                f"extrapolation not settled: {est!r} vs {alt!r} (tolerance {tolerance})"
            )
    return est


@dataclass(frozen=True)
class RadialIntegrals:
    """Extrapolated radial integrals for one plan."""

    J00: float
    J02: float
    J22: float
    log_pair: float
    S00: float
    S22: float

    @property
    def J20(self) -> float:
        """Nested ``(2, 0)`` integral fixed by re-expansion invariance."""
        return 2.0 * self.J22 - self.J02

    @property
    def S02(self) -> float:
        """Single ``(0, 2)`` integral with the same small-radius split."""
        return self.log_pair - self.J20

    def nested(self, lo, li):
        return {(0, 0): self.J00, (0, 2): self.J02, (2, 0): self.J20, (2, 2): self.J22}[(lo, li)]

    def single(self, la, lb):
        return {(0, 0): self.S00, (2, 2): self.S22, (0, 2): self.S02, (2, 0): self.S02}[(la, lb)]


@lru_cache(maxsize=16)
def radial_integrals(plan: RegularizationPlan = RegularizationPlan()) -> RadialIntegrals:
    """Evaluate and extrapolate every radial integral needed by the channels."""
    kw = dict(rho_max=plan.rho_max, n=plan.nodes)
    rows = defaultdict(list)
    for e in plan.epsilons:
        rows["J00"].append(radial.nested_integral(0, 0, e, **kw).real)
        rows["J02"].append(radial.nested_integral(0, 2, e, **kw).real)
        rows["J22"].append(radial.nested_integral(2, 2, e, **kw).real)
        rows["log_pair"].append(radial.combined_log_pair(e, **kw))
        rows["S00"].append(-radial.single_integral(0, 0, e, **kw).imag)
        rows["S22"].append(-radial.single_integral(2, 2, e, **kw).imag)
    vals = {k: extrapolate(plan.epsilons, v, plan.extrapolation_order, plan.tolerance)
            for k, v in rows.items()}
    return RadialIntegrals(**vals)


# --- first order ---------------------------------------------------------------

def first_order_weights():
    """``{(L, L'): w}`` with first order ``= sum w S(L, L') / (6 pi)``."""
    w = defaultdict(float)
    for m in (-1, 0, 1):
        a = multipole_coefficients(Channel(0, m))
        c = multipole_coefficients(Channel(m, 0))
        for (la, ma), ca in a.items():
            for (lc, mc), cc in c.items():
                if la == lc and ma == -mc:
                    w[(la, lc)] += ca * cc * (-1) ** ma
    return dict(w)


def first_order_density(rho):
    """Angle-integrated ``sum_m G[0,m] G[m,0]`` at radius ``rho`` (complex).

    Without the ``rho^2`` measure this decays as ``rho^-2``.
    """
    rho = np.asarray(rho, dtype=float)
    out = 0.0
    for (la, lb), w in first_order_weights().items():
        out = out + w * spherical_hankel_h1(la, rho) * spherical_hankel_h1(lb, rho)
    return out


def first_order_coefficient(plan: RegularizationPlan = RegularizationPlan()) -> float:
    """Coefficient of ``N alpha`` in the fractional decay-rate change."""
    ints = radial_integrals(plan)
    return sum(w * ints.single(la, lb) for (la, lb), w in first_order_weights().items()) / (6 * pi)


# --- second order: angular reduction ---------------------------------------------

@dataclass(frozen=True)
class RadialTerm:
    """One weighted nested radial integral of a channel.

    The channel value is ``sum(term.weight * J(term.l_outer, term.l_inner))``.
    ``region`` names the ordering of the two integration radii and
    ``exchange_orders`` lists the multipoles of the re-expanded propagator
    that contribute.
    """

    weight: float
    l_outer: int
    l_inner: int
    region: str
    exchange_orders: tuple = field(default=())


_EXPANSIONS = ("middle", "first", "last")
_VARIABLES = {"middle": ("rho2", "rho1"), "first": ("rho", "rho1"), "last": ("rho2", "rho")}


def _reduction(fa, fb, fmid, sa, sb):
    """Contract ``fa(P) fmid(sa P - sb Q) fb(Q)`` over both solid angles.

    Returns ``{(big, l_outer, l_inner, l_mid): weight}`` where ``big`` is
    ``"P"`` or ``"Q"``, the variable at the larger radius.
    """
    acc = defaultdict(complex)
    for (l, mu), b in fmid.items():
        for (la, ma), a in fa.items():
            for (lb, mb), c in fb.items():
                sign = (-1) ** (ma + mb) * sa ** la * sb ** lb
                t = bipolar_coefficient(la, lb, -ma, -mb, l, mu)
                if t != 0.0:
                    acc[("P", la, lb, l)] += a * b * c * t * sign
                t = bipolar_coefficient(lb, la, -mb, -ma, l, mu)
                if t != 0.0:
                    acc[("Q", lb, la, l)] += a * b * c * t * sign * (-1) ** l
    return acc


def reduce_channel_to_radial(ch: Channel, expand: str = "middle") -> list[RadialTerm]:
    """Radial terms of a second-order channel.

    Parameters
    ----------
    ch : Channel
        ``(m, m')`` of the middle propagator.
    expand : {"middle", "first", "last"}
        Which factor of ``G[0,m] G[m,m'] G[m',0]`` is re-expanded about two
        centers.  ``"middle"`` integrates over ``R2, R1``; ``"first"`` over
        ``R = R2 - R1, R1``; ``"last"`` over ``R2, R``.

    Returns
    -------
    list of RadialTerm
        Merged by ``(l_outer, l_inner, region)``; weights include the
        ``-(1/6 pi)^2`` prefactor and are real.
    """
    if expand not in _EXPANSIONS:
        raise DomainError(f"expand must be one of {_EXPANSIONS}")
    g_out = multipole_coefficients(Channel(0, ch.m_from))
    g_mid = multipole_coefficients(ch)
    g_in = multipole_coefficients(Channel(ch.m_to, 0))
    if expand == "middle":
        raw = _reduction(g_out, g_in, g_mid, 1, 1)
    elif expand == "first":
        raw = _reduction(g_mid, g_in, g_out, 1, -1)
    else:
        raw = _reduction(g_out, g_mid, g_in, 1, 1)
    p, q = _VARIABLES[expand]
    merged = defaultdict(float)
    orders = defaultdict(set)
    for (big, lo, li, lm), w in raw.items():
        if abs(w.imag) > 1e-12 * max(1.0, abs(w)):
            raise AssertionError("angular reduction produced a complex weight")
        region = f"{q}<{p}" if big == "P" else f"{p}<{q}"
        merged[(lo, li, region)] += _PREFACTOR2 * w.real
        orders[(lo, li, region)].add(lm)
    return [RadialTerm(w, lo, li, region, tuple(sorted(orders[(lo, li, region)])))
            for (lo, li, region), w in sorted(merged.items()) if abs(w) > 1e-15]


@dataclass(frozen=True)
class ChannelCoefficient:
    """Second-order coefficient of ``(N alpha)^2`` for one channel."""

    channel: Channel
    principal_value: float
    contact_value: float | None = None

    @property
    def total(self) -> float | None:
        if self.contact_value is None:
            return None
        return self.principal_value + self.contact_value


def second_order_channel(ch: Channel, plan: RegularizationPlan = RegularizationPlan(),
                         expand: str = "middle") -> ChannelCoefficient:
    """Principal value of a channel (contact region excluded)."""
    ints = radial_integrals(plan)
    value = sum(t.weight * ints.nested(t.l_outer, t.l_inner)
                for t in reduce_channel_to_radial(ch, expand))
    return ChannelCoefficient(ch, float(value))


def channel_imaginary_part(ch: Channel, eps: float, cutoff: float,
                           rho_max: float | None = None) -> float:
    """Imaginary part of a damped channel integral with small-radius cutoff.

    It grows without bound as ``cutoff -> 0`` at fixed ``eps``.
    """
    rho_max = 30.0 / eps if rho_max is None else rho_max
    return float(sum(
        t.weight * radial.nested_integral(t.l_outer, t.l_inner, eps,
                                          rho_max=rho_max, cutoff=cutoff).imag
        for t in reduce_channel_to_radial(ch)))


# --- contact region ----------------------------------------------------------------

def contact_shell_integral(l_outer, m_outer, l_mid, mu, l_inner, m_inner,
                           plan: RegularizationPlan = RegularizationPlan()) -> float:
    """Real part of the coincident-radius contribution, in units of ``k0^-6``.

    Fourier transforming the middle factor ``h_l Y[l, mu]`` and integrating
    the second radius across a thin shell around the first leaves, from the
    closure relation of ``j_l`` in the transform variable, a delta function
    in the radial separation with weight ``4 pi i``.  What remains is a Gaunt
    coefficient times ``int rho^2 h_lo h_li``.  A monopole middle factor has
    no such term.
    """
    if l_mid == 0:
        return 0.0
    if l_mid != 2:
        raise DomainError("contact terms are defined for l_mid in {0, 2}")
    g = gaunt(l_outer, 2, l_inner, m_outer, mu, m_inner)
    if g == 0.0:
        return 0.0
    return 4 * pi * g * radial_integrals(plan).single(l_outer, l_inner)


def contact_term(ch: Channel, plan: RegularizationPlan = RegularizationPlan()) -> float:
    """Contact contribution of a channel, per ``(N alpha)^2``."""
    g_out = multipole_coefficients(Channel(0, ch.m_from))
    g_mid = multipole_coefficients(ch)
    g_in = multipole_coefficients(Channel(ch.m_to, 0))
    total = 0.0
    for (l, mu), b in g_mid.items():
        for (lo, mo), a in g_out.items():
            for (li, mi), c in g_in.items():
                total += a * b * c * contact_shell_integral(lo, mo, l, mu, li, mi, plan)
    return _PREFACTOR2 * total


def channel_coefficient(ch: Channel, plan: RegularizationPlan = RegularizationPlan()
                        ) -> ChannelCoefficient:
    """Principal, contact and total values of one channel."""
    pv = second_order_channel(ch, plan).principal_value
    return ChannelCoefficient(ch, pv, float(contact_term(ch, plan)))


def all_channel_coefficients(plan: RegularizationPlan = RegularizationPlan()
                             ) -> dict[Channel, ChannelCoefficient]:
    """Coefficients of all nine channels."""
    return {ch: channel_coefficient(ch, plan) for ch in CHANNELS}


def total_second_order(include_contacts: bool,
                       plan: RegularizationPlan = RegularizationPlan()) -> float:
    """Sum of all nine channels, ``2 c(1,1) + c(0,0) + 4 c(0,1) + 2 c(-1,1)``."""
    acc = 0.0
    for ch, mult in TOTAL_WEIGHTS.items():
        cc = channel_coefficient(ch, plan)
        acc += mult * (cc.total if include_contacts else cc.principal_value)
    return float(acc)

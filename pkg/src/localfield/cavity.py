"""Macroscopic cavity models for the decay rate in a dielectric.

The permittivity follows the Lorentz-Lorenz relation
``eps = 1 + x / (1 - x/3)`` with ``x = N alpha``.  Two cavity pictures give

virtual  ``sqrt(eps) * ((eps + 2) / 3)**2``
real     ``sqrt(eps) * (3 eps / (2 eps + 1))**2``

as the ratio of the decay rate to its vacuum value.
"""

from __future__ import annotations

import enum

import numpy as np

from .errors import DomainError, PoleError

__all__ = [
    "CavityModel",
    "permittivity",
    "decay_rate",
    "series_coefficients",
    "series_partial_sum",
]


class CavityModel(enum.Enum):
    VIRTUAL = "virtual"
    REAL = "real"

    @classmethod
    def parse(cls, value) -> "CavityModel":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError as exc:
            raise DomainError(f"unknown cavity model {value!r}") from exc


def _eps(x):
    return 1.0 + x / (1.0 - x / 3.0)


def _rate(model, eps):
    if model is CavityModel.VIRTUAL:
        return np.sqrt(eps) * ((eps + 2.0) / 3.0) ** 2
    return np.sqrt(eps) * (3.0 * eps / (2.0 * eps + 1.0)) ** 2


def permittivity(n_alpha: float) -> float:
    """Lorentz-Lorenz permittivity for density-polarizability product ``n_alpha``."""
    if n_alpha >= 3.0:
        raise PoleError("n_alpha must be below 3")
    return float(_eps(n_alpha))


def decay_rate(model, n_alpha: float) -> float:
    """Decay rate relative to vacuum for the chosen cavity model."""
    model = CavityModel.parse(model)
    eps = permittivity(n_alpha)
    if eps <= 0.0:
        raise DomainError("permittivity must be positive")
    return float(_rate(model, eps))


def series_coefficients(model, order: int, *, radius: float = 0.25, points: int = 64) -> list[float]:
    """Taylor coefficients of the decay rate in ``N alpha`` up to ``order``.

    The coefficients are obtained numerically from samples of the rate on a
    circle of ``radius`` in the complex ``N alpha`` plane (trapezoidal Cauchy
    integral via FFT).  The rate is analytic for ``|N alpha| < 3/2``, so the
    aliasing error falls like ``(radius / 1.5)**points``.
    """
    model = CavityModel.parse(model)
    if order < 0:
        raise DomainError("order must be non-negative")
    if not 0 < radius < 1.5 or points <= order:
        raise DomainError("need 0 < radius < 1.5 and points > order")
    z = radius * np.exp(2j * np.pi * np.arange(points) / points)
    f = _rate(model, _eps(z))
    coeffs = np.fft.fft(f) / points
    return [float(coeffs[k].real / radius**k) for k in range(order + 1)]


def series_partial_sum(model, n_alpha: float, order: int) -> float:
    """Truncated Taylor series of :func:`decay_rate`."""
    c = series_coefficients(model, order)
    return float(sum(ck * n_alpha**k for k, ck in enumerate(c)))

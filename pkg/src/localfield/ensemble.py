"""Monte Carlo resolvent model of a source atom in a random dielectric.

For a fixed configuration of ``N`` polarizable atoms at positions ``R_j``
(relative to the source), the complex shift of the source amplitude decay
constant is

    d_lambda / gamma = -g * u^T [(gamma' - i Delta) I + gamma' G]^-1 v

with ``g = gamma (mu'/mu)^2``, ``u[j, m] = G[0, m](R_j)``,
``v[j, m] = G[m, 0](R_j)`` and ``G`` the ``3N x 3N`` matrix of propagators
between distinct atoms.  The real part is the fractional change of the
decay rate; to leading order it equals
``i (alpha k0^3 / 6 pi) sum_j sum_m G[0,m](R_j) G[m,0](R_j)``.
"""

from __future__ import annotations

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from math import pi, sqrt

import numpy as np
from scipy import optimize

from . import radial
from .errors import DomainError, PackingError, SingularityError, SolverError
from .perturbation import first_order_coefficient, first_order_weights
from .propagator import propagator_matrix

__all__ = [
    "PhysicalParams",
    "EnsembleConfig",
    "ShiftStatistics",
    "sample_positions",
    "build_interaction_matrix",
    "source_vectors",
    "effective_rate_shift",
    "neumann_terms",
    "monte_carlo_average",
    "finite_sample_first_order",
    "matched_sample_radius",
    "default_workers",
    "THREADS_ENV",
]

log = logging.getLogger(__name__)

#: Environment variable holding the worker-thread count.
THREADS_ENV = "LOCALFIELD_NUM_THREADS"


def default_workers() -> int:
    """Worker count from ``LOCALFIELD_NUM_THREADS``, else available CPUs."""
    raw = os.environ.get(THREADS_ENV, "").strip()
    if raw:
        try:
            n = int(raw)
        except ValueError as exc:
            raise DomainError(f"{THREADS_ENV} must be a positive integer") from exc
        if n < 1:
            raise DomainError(f"{THREADS_ENV} must be a positive integer")
        return n
    try:
        return len(os.sched_getaffinity(0))
    except AttributeError:  # pragma: no cover
        return os.cpu_count() or 1


@dataclass(frozen=True)
class PhysicalParams:
    """Source and dielectric constants.

    Parameters
    ----------
    gamma : float
        Half the source decay rate.
    gamma_prime : float
        Half the decay rate of a dielectric atom.
    delta : float
        Detuning of the dielectric atoms; ``|delta| >> gamma_prime``.
    k0 : float
        Resonant wavenumber.
    mu_ratio : float
        Ratio of dielectric to source dipole moments.
    """

    gamma: float = 1.0
    gamma_prime: float = 1.0
    delta: float = -100.0
    k0: float = 1.0
    mu_ratio: float = 1.0

    def __post_init__(self):
        if self.gamma <= 0 or self.gamma_prime <= 0 or self.k0 <= 0:
            raise DomainError("gamma, gamma_prime and k0 must be positive")
        if self.delta == 0:
            raise DomainError("delta must be nonzero")
        if abs(self.delta) < 10 * self.gamma_prime:
            raise DomainError("far-detuned regime requires |delta| >= 10 gamma_prime")

    @property
    def alpha(self) -> float:
        """Polarizability ``-6 pi gamma' / (k0^3 delta)``."""
        return -6 * pi * self.gamma_prime / (self.k0**3 * self.delta)

    @property
    def coupling(self) -> float:
        """Dimensionless ``alpha k0^3 / 6 pi``."""
        return -self.gamma_prime / self.delta

    @classmethod
    def from_n_alpha(cls, n_alpha: float, density: float, *, k0: float = 1.0,
                     gamma: float = 1.0, gamma_prime: float = 1.0) -> "PhysicalParams":
        """Choose the detuning that gives ``density * alpha == n_alpha``.

        ``mu_ratio`` is set to ``sqrt(gamma_prime / gamma)``.
        """
        if n_alpha <= 0 or density <= 0:
            raise DomainError("n_alpha and density must be positive")
        alpha = n_alpha / density
        delta = -6 * pi * gamma_prime / (k0**3 * alpha)
        return cls(gamma, gamma_prime, delta, k0, sqrt(gamma_prime / gamma))


@dataclass(frozen=True)
class EnsembleConfig:
    """Geometry and sampling controls for Monte Carlo runs.

    Lengths are in the same units as ``1 / k0``.  ``exclusion_radius`` bounds
    every pair separation and every atom-source distance from below.
    """

    n_atoms: int
    sample_radius: float
    exclusion_radius: float
    n_samples: int = 1
    seed: int = 0
    max_attempts_per_atom: int = 2000
    max_retries: int = 3
    shift_cap: float = np.inf

    def __post_init__(self):
        if self.n_atoms < 0 or self.n_samples < 1:
            raise DomainError("n_atoms must be >= 0 and n_samples >= 1")
        if self.exclusion_radius < 0 or self.sample_radius <= self.exclusion_radius:
            raise DomainError("need 0 <= exclusion_radius < sample_radius")
        if not 0 <= self.seed < 2**64:
            raise DomainError("seed must be a 64-bit unsigned integer")
        if self.n_atoms * self.exclusion_radius**3 > 0.5 * self.sample_radius**3:
            raise PackingError("requested packing is infeasible")

    @property
    def shell_volume(self) -> float:
        return 4 * pi / 3 * (self.sample_radius**3 - self.exclusion_radius**3)

    @property
    def density(self) -> float:
        """Number density over the allowed shell ``b < |R| < R0``."""
        return self.n_atoms / self.shell_volume


@dataclass(frozen=True)
class ShiftStatistics:
    """Ensemble mean of the complex fractional shift.

    ``std_error`` holds the standard errors of the real and imaginary parts;
    it is ``(nan, nan)`` when only one sample was drawn.
    """

    mean_shift: complex
    std_error: tuple
    n_samples: int
    n_retries: int = 0
    n_over_cap: int = 0
    samples: np.ndarray = field(default=None, repr=False, compare=False)

    @property
    def std_error_defined(self) -> bool:
        return self.n_samples > 1


def _rng(seed):
    return np.random.default_rng(seed)


def sample_positions(cfg: EnsembleConfig, params: PhysicalParams | None = None,
                     rng=None) -> np.ndarray:
    """Uniform random positions in the ball with hard-core exclusion.

    Parameters
    ----------
    cfg : EnsembleConfig
    params : PhysicalParams, optional
        Unused; accepted for interface symmetry.
    rng : numpy Generator or seed, optional
        Defaults to a generator seeded with ``cfg.seed``.

    Returns
    -------
    ndarray, shape (n_atoms, 3)
    """
    gen = rng if isinstance(rng, np.random.Generator) else _rng(cfg.seed if rng is None else rng)
    n, r0, b = cfg.n_atoms, cfg.sample_radius, cfg.exclusion_radius
    out = np.empty((n, 3))
    b2 = b * b
    attempts = 0
    limit = cfg.max_attempts_per_atom * max(n, 1)
    k = 0
    while k < n:
        attempts += 1
        if attempts > limit:
            raise PackingError(f"placed {k} of {n} atoms after {limit} attempts")
        p = gen.uniform(-r0, r0, size=3)
        r2 = p @ p
        if r2 > r0 * r0 or r2 < b2:
            continue
        if k and np.min(np.sum((out[:k] - p) ** 2, axis=1)) < b2:
            continue
        out[k] = p
        k += 1
    return out


def _spherical(vecs):
    r = np.sqrt(np.sum(vecs * vecs, axis=-1))
    theta = np.arccos(np.clip(vecs[..., 2] / np.where(r > 0, r, 1.0), -1.0, 1.0))
    phi = np.arctan2(vecs[..., 1], vecs[..., 0])
    return r, theta, phi


def build_interaction_matrix(positions, params: PhysicalParams) -> np.ndarray:
    """Propagator matrix between distinct atoms, shape ``(3N, 3N)``.

    Block ``(j, s)`` is ``G[m, m'](R_j - R_s)`` with rows ``m`` and columns
    ``m'`` ordered ``-1, 0, 1``; diagonal blocks are zero.
    """
    pos = np.asarray(positions, dtype=float).reshape(-1, 3)
    n = len(pos)
    out = np.zeros((n, 3, n, 3), dtype=complex)
    if n < 2:
        return out.reshape(3 * n, 3 * n)
    jj, ss = np.nonzero(~np.eye(n, dtype=bool))
    r, th, ph = _spherical(params.k0 * (pos[jj] - pos[ss]))
    if np.any(r == 0):
        raise SingularityError("coincident atomic positions")
    blocks = propagator_matrix(r, th, ph)
    out[jj, :, ss, :] = blocks
    return out.reshape(3 * n, 3 * n)


def source_vectors(positions, params: PhysicalParams):
    """``u[j, m] = G[0, m](R_j)`` and ``v[j, m] = G[m, 0](R_j)``, flattened."""
    pos = np.asarray(positions, dtype=float).reshape(-1, 3)
    r, th, ph = _spherical(params.k0 * pos)
    if np.any(r == 0):
        raise SingularityError("atom coincides with the source")
    g = propagator_matrix(r, th, ph)
    return g[:, 1, :].reshape(-1), g[:, :, 1].reshape(-1)


def effective_rate_shift(positions, params: PhysicalParams) -> complex:
    """Complex fractional shift ``d_lambda / gamma`` for one configuration."""
    pos = np.asarray(positions, dtype=float).reshape(-1, 3)
    if len(pos) == 0:
        return 0j
    u, v = source_vectors(pos, params)
    g = build_interaction_matrix(pos, params)
    gp = params.gamma_prime
    m = gp * g
    m[np.diag_indices_from(m)] += gp - 1j * params.delta
    try:
        x = np.linalg.solve(m, v)
    except np.linalg.LinAlgError as exc:
        raise SolverError(str(exc)) from exc
    if not np.all(np.isfinite(x)):
        raise SolverError("non-finite solution")
    return complex(-params.gamma * params.mu_ratio**2 * (u @ x))


def neumann_terms(positions, params: PhysicalParams, order: int) -> list[complex]:
    """Terms ``0..order`` of the expansion of the shift in powers of ``G``."""
    pos = np.asarray(positions, dtype=float).reshape(-1, 3)
    if len(pos) == 0:
        return [0j] * (order + 1)
    u, v = source_vectors(pos, params)
    g = build_interaction_matrix(pos, params)
    c = params.gamma_prime - 1j * params.delta
    pref = -params.gamma * params.mu_ratio**2
    out = []
    w = v.copy()
    for n in range(order + 1):
        out.append(complex(pref * (u @ w) / c ** (n + 1)))
        w = -params.gamma_prime * (g @ w)
    return out


def _one_sample(cfg, params, seed_seq):
    retries = 0
    seq = seed_seq
    while True:
        try:
            pos = sample_positions(cfg, params, _rng(seq))
            return effective_rate_shift(pos, params), retries
        except (PackingError, SolverError, SingularityError) as exc:
            retries += 1
            if retries > cfg.max_retries:
                raise
            log.warning("sample retry %d after %s", retries, exc)
            seq = seq.spawn(1)[0]


def monte_carlo_average(cfg: EnsembleConfig, params: PhysicalParams,
                        workers: int | None = None) -> ShiftStatistics:
    """Ensemble mean and standard error of :func:`effective_rate_shift`.

    Each sample draws from its own child of ``SeedSequence(cfg.seed)``, so the
    result is identical for any number of workers.
    """
    workers = default_workers() if workers is None else int(workers)
    children = np.random.SeedSequence(cfg.seed).spawn(cfg.n_samples)
    if workers > 1 and cfg.n_samples > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda s: _one_sample(cfg, params, s), children))
    else:
        results = [_one_sample(cfg, params, s) for s in children]
    shifts = np.array([r[0] for r in results], dtype=complex)
    retries = sum(r[1] for r in results)
    over = int(np.sum(np.abs(shifts) > cfg.shift_cap))
    if over:
        log.warning("%d samples exceed shift cap %g", over, cfg.shift_cap)
    n = len(shifts)
    mean = complex(np.mean(shifts))
    if n > 1:
        se = (float(np.std(shifts.real, ddof=1) / sqrt(n)),
              float(np.std(shifts.imag, ddof=1) / sqrt(n)))
    else:
        se = (float("nan"), float("nan"))
    return ShiftStatistics(mean, se, n, retries, over, shifts)


# --- finite-sample first-order theory --------------------------------------------

def finite_sample_first_order(exclusion_radius: float, sample_radius: float,
                              k0: float = 1.0) -> float:
    """First-order coefficient of ``N alpha`` for a uniform shell ``b < |R| < R0``.

    The bulk value is the Abel limit of the same integral with ``b -> 0`` and
    ``R0 -> infinity``; finite radii add an excluded-core deficit and an
    oscillating boundary term.
    """
    lo, hi = k0 * exclusion_radius, k0 * sample_radius
    if not 0 <= lo < hi:
        raise DomainError("need 0 <= exclusion_radius < sample_radius")
    total = 0.0
    for (la, lb), w in first_order_weights().items():
        total += w * -radial.single_integral(la, lb, 0.0, rho_max=hi, cutoff=lo).imag
    return total / (6 * pi)


def matched_sample_radius(exclusion_radius: float, near: float, k0: float = 1.0,
                          target: float | None = None) -> float:
    """Sample radius closest to ``near`` whose finite-sample first order equals ``target``.

    ``target`` defaults to the bulk first-order coefficient, so that a
    Monte Carlo mean over such a sample estimates the bulk value.
    """
    if target is None:
        target = first_order_coefficient()

    def f(r0):
        return finite_sample_first_order(exclusion_radius, r0, k0) - target

    step = 0.05 / k0
    lo = hi = near
    for _ in range(400):
        for a, b in ((lo - step, lo), (hi, hi + step)):
            if a > exclusion_radius and f(a) * f(b) <= 0:
                return float(optimize.brentq(f, a, b, xtol=1e-12))
        lo, hi = lo - step, hi + step
    raise DomainError("no matching sample radius found near the requested value")

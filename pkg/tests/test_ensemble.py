import logging

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from localfield import ensemble as E
from localfield.errors import DomainError, PackingError, SingularityError
from localfield.perturbation import first_order_density
from localfield.propagator import Channel, Displacement, propagator_element

PARAMS = E.PhysicalParams()


def small_cfg(**kw):
    base = dict(n_atoms=20, sample_radius=6.0, exclusion_radius=0.5, n_samples=40, seed=7)
    base.update(kw)
    return E.EnsembleConfig(**base)


def test_params():
    p = E.PhysicalParams(gamma_prime=2.0, delta=-50.0, k0=2.0)
    assert p.alpha == pytest.approx(6 * np.pi * 2.0 / (8.0 * 50.0))
    assert p.coupling == pytest.approx(p.alpha * p.k0**3 / (6 * np.pi))
    q = E.PhysicalParams.from_n_alpha(0.01, 0.2)
    assert q.alpha * 0.2 == pytest.approx(0.01)
    with pytest.raises(DomainError):
        E.PhysicalParams(delta=-5.0)
    with pytest.raises(DomainError):
        E.PhysicalParams(gamma=0.0)


def test_config_validation():
    with pytest.raises(PackingError):
        E.EnsembleConfig(n_atoms=1000, sample_radius=5.0, exclusion_radius=1.0)
    with pytest.raises(DomainError):
        E.EnsembleConfig(n_atoms=5, sample_radius=1.0, exclusion_radius=2.0)
    with pytest.raises(DomainError):
        E.EnsembleConfig(n_atoms=5, sample_radius=4.0, exclusion_radius=1.0, n_samples=0)
    cfg = small_cfg()
    assert cfg.density == pytest.approx(20 / (4 * np.pi / 3 * (216 - 0.125)))


def test_sample_positions_constraints():
    cfg = small_cfg(n_atoms=120, sample_radius=5.0, exclusion_radius=0.8)
    pos = E.sample_positions(cfg)
    r = np.linalg.norm(pos, axis=1)
    assert pos.shape == (120, 3)
    assert r.min() >= 0.8 and r.max() <= 5.0
    d = np.linalg.norm(pos[:, None] - pos[None], axis=-1)
    assert d[~np.eye(120, dtype=bool)].min() >= 0.8
    np.testing.assert_array_equal(pos, E.sample_positions(cfg))
    assert E.sample_positions(small_cfg(n_atoms=0)).shape == (0, 3)


def test_packing_failure():
    cfg = E.EnsembleConfig(n_atoms=30, sample_radius=2.0, exclusion_radius=0.5,
                           max_attempts_per_atom=1)
    with pytest.raises(PackingError):
        E.sample_positions(cfg)


def test_matrix_small_n():
    assert E.build_interaction_matrix(np.zeros((0, 3)), PARAMS).shape == (0, 0)
    one = E.build_interaction_matrix([[1.0, 2.0, 3.0]], PARAMS)
    np.testing.assert_array_equal(one, np.zeros((3, 3)))
    pos = np.array([[0.0, 0.0, 1.0], [0.0, 0.0, 3.5]])
    g = E.build_interaction_matrix(pos, PARAMS)
    blk = g[0:3, 3:6]
    d = Displacement.from_cartesian(pos[0] - pos[1])
    # collinear along z: only diagonal channels survive
    np.testing.assert_allclose(blk - np.diag(np.diag(blk)), 0.0, atol=1e-15)
    assert blk[1, 1] == pytest.approx(propagator_element(Channel(0, 0), d), rel=1e-14)
    assert blk[2, 2] == pytest.approx(propagator_element(Channel(1, 1), d), rel=1e-14)
    np.testing.assert_array_equal(g[0:3, 0:3], 0)
    with pytest.raises(SingularityError):
        E.build_interaction_matrix([[1, 0, 0], [1, 0, 0]], PARAMS)


def test_block_reciprocity():
    pos = E.sample_positions(small_cfg(n_atoms=6))
    g = E.build_interaction_matrix(pos, PARAMS).reshape(6, 3, 6, 3)
    sign = np.array([[(-1) ** (a + b) for b in (-1, 0, 1)] for a in (-1, 0, 1)])
    for j in range(6):
        for s in range(6):
            if j != s:
                # G[m, m'](R) = (-1)^(m + m') G[-m', -m](-R)
                np.testing.assert_allclose(g[j, :, s, :], sign * g[s, ::-1, j, ::-1].T,
                                           rtol=1e-12, atol=1e-14)


def test_empty_and_source_singularity():
    assert E.effective_rate_shift(np.zeros((0, 3)), PARAMS) == 0
    with pytest.raises(SingularityError):
        E.effective_rate_shift([[0.0, 0.0, 0.0]], PARAMS)


@given(st.floats(0.3, 10), st.floats(0, np.pi), st.floats(-np.pi, np.pi))
@settings(max_examples=30, deadline=None)
def test_leading_term_single_atom(rho, theta, phi):
    d = Displacement(rho, theta, phi)
    pos = d.cartesian()[None, :]
    gg = sum(propagator_element(Channel(0, m), d) * propagator_element(Channel(m, 0), d)
             for m in (-1, 0, 1))
    a = PARAMS.coupling
    t0 = E.neumann_terms(pos, PARAMS, 0)[0]
    assert t0 == pytest.approx(1j * a * gg / (1 - 1j * a), rel=1e-12)
    # single atom: the resolvent is exactly the leading term
    assert E.effective_rate_shift(pos, PARAMS) == pytest.approx(t0, rel=1e-12)


def test_leading_term_angular_average():
    # direction average of sum_m G[0,m] G[m,0] reproduces the radial first-order density
    rho = 2.3
    x, w = np.polynomial.legendre.leggauss(12)
    phis = 2 * np.pi * np.arange(24) / 24
    acc = 0.0
    for xi, wi in zip(x, w):
        for ph in phis:
            d = Displacement(rho, np.arccos(xi), ph)
            acc += wi * (2 * np.pi / 24) * sum(
                propagator_element(Channel(0, m), d) * propagator_element(Channel(m, 0), d)
                for m in (-1, 0, 1))
    assert acc == pytest.approx(first_order_density(rho), rel=1e-12)


def test_resolvent_vs_series():
    rng = np.random.default_rng(3)
    checked = 0
    for _ in range(10):
        cfg = small_cfg(n_atoms=15, seed=int(rng.integers(2**32)))
        pos = E.sample_positions(cfg)
        g = E.build_interaction_matrix(pos, PARAMS)
        c = PARAMS.gamma_prime - 1j * PARAMS.delta
        if np.linalg.norm(PARAMS.gamma_prime * g / c, 2) >= 0.3:
            continue
        checked += 1
        t = E.neumann_terms(pos, PARAMS, 3)
        exact = E.effective_rate_shift(pos, PARAMS)
        assert abs(exact - (t[0] + t[1])) <= 2 * abs(t[2]) + 1e-16
        assert abs(exact - sum(t)) < abs(exact - (t[0] + t[1]))
    assert checked >= 5


def test_determinism_and_workers():
    cfg = small_cfg()
    a = E.monte_carlo_average(cfg, PARAMS, workers=1)
    b = E.monte_carlo_average(cfg, PARAMS, workers=1)
    c = E.monte_carlo_average(cfg, PARAMS, workers=4)
    assert a.mean_shift == b.mean_shift == c.mean_shift
    assert a.std_error == b.std_error == c.std_error
    np.testing.assert_array_equal(a.samples, c.samples)
    d = E.monte_carlo_average(small_cfg(seed=8), PARAMS, workers=1)
    assert d.mean_shift != a.mean_shift


def test_prefix_stability():
    # each sample has its own stream, so a shorter run is a prefix of a longer one
    a = E.monte_carlo_average(small_cfg(n_samples=10), PARAMS, workers=1)
    b = E.monte_carlo_average(small_cfg(n_samples=20), PARAMS, workers=1)
    assert np.all(a.samples == b.samples[:10])


def test_single_sample():
    cfg = small_cfg(n_samples=1)
    s = E.monte_carlo_average(cfg, PARAMS)
    assert not s.std_error_defined
    assert all(np.isnan(s.std_error))
    assert s.mean_shift == s.samples[0]


def test_std_error_scaling():
    # a wide exclusion radius keeps the shift distribution light-tailed
    a = E.monte_carlo_average(small_cfg(n_samples=200, n_atoms=10, exclusion_radius=1.5), PARAMS)
    b = E.monte_carlo_average(small_cfg(n_samples=400, n_atoms=10, exclusion_radius=1.5,
                                        seed=99), PARAMS)
    assert min(a.std_error) >= 0
    ratio = b.std_error[0] / a.std_error[0]
    assert 0.55 < ratio < 0.9


def test_exclusion_sweep_and_cap(caplog):
    n_alpha, cap = 0.01, 1.0
    means, errs = [], []
    for b in (1.0, 0.7, 0.5, 0.3, 0.1):
        cfg = E.EnsembleConfig(n_atoms=40, sample_radius=7.0, exclusion_radius=b,
                               n_samples=100, seed=11, shift_cap=cap)
        params = E.PhysicalParams.from_n_alpha(n_alpha, cfg.density)
        caplog.clear()
        with caplog.at_level(logging.WARNING, logger="localfield.ensemble"):
            s = E.monte_carlo_average(cfg, params)
        over = int(np.sum(np.abs(s.samples) > cap))
        assert s.n_over_cap == over
        assert ("exceed shift cap" in caplog.text) == (over > 0)
        if b == 1.0:
            # a wide core keeps every sample below the cap
            assert over == 0
        means.append(s.mean_shift.real / n_alpha)
        errs.append(s.std_error[0] / n_alpha)
    assert np.all(np.isfinite(means))
    steps = np.abs(np.diff(means))
    assert np.all(steps < 3 * np.hypot(errs[:-1], errs[1:]))


def test_default_workers(monkeypatch):
    monkeypatch.setenv(E.THREADS_ENV, "3")
    assert E.default_workers() == 3
    monkeypatch.setenv(E.THREADS_ENV, "zero")
    with pytest.raises(DomainError):
        E.default_workers()
    monkeypatch.delenv(E.THREADS_ENV)
    assert E.default_workers() >= 1


def test_finite_sample_first_order():
    # core deficit and boundary oscillation vanish in the bulk limit
    r0 = E.matched_sample_radius(0.5, near=9.0)
    assert r0 == pytest.approx(8.3376, abs=1e-3)
    assert E.finite_sample_first_order(0.5, r0) == pytest.approx(7 / 6, abs=1e-8)
    vals = [E.finite_sample_first_order(1e-4, r) for r in np.linspace(40, 43.2, 9)]
    assert np.mean(vals) == pytest.approx(7 / 6, abs=0.05)

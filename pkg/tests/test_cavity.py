import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from localfield.cavity import (
    CavityModel,
    decay_rate,
    permittivity,
    series_coefficients,
    series_partial_sum,
)
from localfield.errors import DomainError, PoleError
from localfield.perturbation import total_second_order


def test_permittivity():
    assert permittivity(0.0) == 1.0
    assert permittivity(0.3) == pytest.approx(4 / 3, rel=1e-15)
    with pytest.raises(PoleError):
        permittivity(3.0)


def test_vacuum_limit():
    for model in CavityModel:
        assert decay_rate(model, 0.0) == 1.0
    assert series_coefficients("virtual", 0) == pytest.approx([1.0], abs=1e-15)


def test_decay_rate_frozen():
    # composed closed forms in extended precision, frozen
    assert decay_rate("virtual", 0.1) == pytest.approx(1.1241454418430468584, rel=1e-14)
    assert decay_rate("real", 0.1) == pytest.approx(1.1193156066460428554, rel=1e-14)
    e = permittivity(0.1)
    assert decay_rate(CavityModel.VIRTUAL, 0.1) == pytest.approx(np.sqrt(e) * ((e + 2) / 3) ** 2)


def test_series_golden():
    np.testing.assert_allclose(series_coefficients("real", 2), [1, 7 / 6, 19 / 72], atol=1e-12)
    np.testing.assert_allclose(series_coefficients("virtual", 2), [1, 7 / 6, 17 / 24], atol=1e-12)


def test_models_agree_through_first_order():
    a = series_coefficients("real", 3)
    b = series_coefficients("virtual", 3)
    assert a[:2] == pytest.approx(b[:2], abs=1e-9)
    assert abs(a[2] - b[2]) > 0.1


def test_series_against_finite_differences():
    # independent route: central differences on the real axis
    h = 1e-3
    for model in CavityModel:
        f = [decay_rate(model, k * h) for k in (-2, -1, 0, 1, 2)]
        d2 = (-f[0] + 16 * f[1] - 30 * f[2] + 16 * f[3] - f[4]) / (12 * h * h) / 2
        assert series_coefficients(model, 2)[2] == pytest.approx(d2, abs=1e-6)


@given(st.floats(0.0, 0.2), st.integers(1, 3))
@settings(max_examples=40, deadline=None)
def test_partial_sums_converge(x, order):
    for model in CavityModel:
        err = abs(series_partial_sum(model, x, order) - decay_rate(model, x))
        assert err <= 5.0 * x ** (order + 1) + 1e-13


def test_microscopic_matches_virtual():
    assert total_second_order(True) == pytest.approx(series_coefficients("virtual", 2)[2], abs=1e-3)


def test_errors():
    with pytest.raises(DomainError):
        CavityModel.parse("hollow")
    with pytest.raises(DomainError):
        series_coefficients("real", -1)
    assert CavityModel.parse("REAL") is CavityModel.REAL

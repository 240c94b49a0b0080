import numpy as np
import pytest

from localfield import exact, radial
from localfield.errors import UnsupportedOrderError
from localfield.perturbation import RegularizationPlan, radial_integrals

EPS = 0.5
RHO_MAX = 30 / EPS


@pytest.mark.parametrize("lo,li", [(0, 0), (0, 2), (2, 2)])
def test_nested_against_exponential_integral_reduction(lo, li):
    quad = radial.nested_integral(lo, li, EPS, rho_max=RHO_MAX).real
    ref = exact.nested_integral(lo, li, EPS)
    assert quad == pytest.approx(ref, abs=1e-8)


@pytest.mark.parametrize("la,lb", [(0, 0), (0, 2), (2, 2)])
@pytest.mark.parametrize("cutoff", [1e-3, 0.2])
def test_single_against_exponential_integral_reduction(la, lb, cutoff):
    quad = radial.single_integral(la, lb, EPS, rho_max=RHO_MAX, cutoff=cutoff)
    ref = exact.single_integral(la, lb, EPS, cutoff)
    assert quad == pytest.approx(ref, rel=1e-8)


def test_single_frozen_values():
    # mpmath incomplete-gamma reduction, frozen
    s22 = -radial.single_integral(2, 2, EPS, rho_max=RHO_MAX).imag
    assert s22 == pytest.approx(0.98327092785431286227, abs=1e-9)
    s00 = -radial.single_integral(0, 0, EPS, rho_max=RHO_MAX).imag
    assert s00 == pytest.approx(2 / (4 + EPS**2), abs=1e-12)


def test_l0_inner_closed_form():
    ref = exact.nested_integral_l0_inner(0, EPS, 0.0)
    quad = radial.nested_integral(0, 0, EPS, rho_max=RHO_MAX)
    assert complex(ref).real == pytest.approx(quad.real, abs=1e-10)


def test_log_pair_is_finite_and_cutoff_independent():
    a = radial.combined_log_pair(EPS, rho_max=RHO_MAX)
    b = radial.combined_log_pair(EPS, rho_max=RHO_MAX, n=30)
    assert np.isfinite(a) and a == pytest.approx(b, abs=1e-10)


def test_log_divergence_of_inner_monopole_pair():
    vals = [radial.nested_integral(2, 0, EPS, rho_max=RHO_MAX, cutoff=c).real
            for c in (1e-2, 1e-3, 1e-4)]
    steps = np.diff(vals)
    # equal increments per decade: logarithmic growth
    assert abs(steps[0]) > 0.1
    assert steps[1] == pytest.approx(steps[0], rel=1e-2)


def test_unsupported_orders():
    with pytest.raises(UnsupportedOrderError):
        radial.nested_integral(1, 0, EPS, rho_max=RHO_MAX)
    with pytest.raises(UnsupportedOrderError):
        radial.single_integral(0, 3, EPS, rho_max=RHO_MAX)


def test_panel_edges():
    e = radial.panel_edges(1e-6, 50.0)
    assert e[0] == pytest.approx(1e-6) and e[-1] == pytest.approx(50.0)
    assert np.all(np.diff(e) > 0)
    assert np.diff(e).max() <= 1.0 + 1e-12


def test_abel_limits():
    ints = radial_integrals(RegularizationPlan())
    assert ints.J00 == pytest.approx(1 / 16, abs=1e-8)
    assert ints.J22 == pytest.approx(-15 / 16, abs=1e-8)
    assert ints.J02 == pytest.approx((17 - 24 * np.log(2)) / 16, abs=1e-8)
    assert ints.S00 == pytest.approx(0.5, abs=1e-8)
    assert ints.S22 == pytest.approx(2.5, abs=1e-8)
    # both routes to the (2, 0) integral agree, so the (0, 2) single term vanishes
    assert ints.log_pair == pytest.approx(ints.J20, abs=1e-7)
    assert abs(ints.S02) < 1e-7

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qhyp import geometry as geo
from qhyp import harmonic as hm
from qhyp import verify as vf


# -- pseudo-isometry fit -------------------------------------------------------------------


def test_fit_of_isometry_is_trivial():
    d = np.linspace(0.1, 5, 20)
    fit = vf.pseudo_isometry_fit(d, d)
    assert fit.a == 1.0 and fit.b == 0.0


def test_fit_of_doubling():
    d = np.linspace(0.1, 5, 20)
    fit = vf.pseudo_isometry_fit(d, 2 * d)
    assert fit.a == pytest.approx(2.0)
    assert fit.b == 0.0


def test_fit_of_additive_shortfall():
    d = np.linspace(1.0, 5, 20)
    fit = vf.pseudo_isometry_fit(d, np.maximum(d - 0.5, 0))
    assert fit.a == 1.0 and fit.b == pytest.approx(0.5)
    assert vf.pseudo_isometry_fit(d, np.maximum(d - 0.5, 0), slack=0.2).b == pytest.approx(0.3)


def test_fit_zero_source_distance_gives_infinite_slope():
    dM = np.r_[0.0, np.ones(10)]
    dN = np.r_[1.0, np.ones(10)]
    assert vf.pseudo_isometry_fit(dM, dN).a == math.inf


def test_fit_input_validation():
    with pytest.raises(ValueError):
        vf.pseudo_isometry_fit(np.ones(5), np.ones(5))
    with pytest.raises(ValueError):
        vf.pseudo_isometry_fit(-np.ones(10), np.ones(10))


@given(st.lists(st.floats(0.01, 100), min_size=10, max_size=40), st.floats(0.1, 10))
def test_fit_inequalities_hold_on_input(dM, scale):
    dM = np.array(dM)
    dN = scale * dM + np.sin(dM)
    dN = np.abs(dN)
    fit = vf.pseudo_isometry_fit(dM, dN)
    assert np.all(dN <= fit.a * dM * (1 + 1e-12))
    assert np.all(dM / fit.a - fit.b <= dN + 1e-12)


# -- verdicts and seeds ---------------------------------------------------------------------


@pytest.mark.parametrize("values,expected", [
    ([1, 2, 30], vf.DIVERGENT),
    ([1, 2, 9], vf.BOUNDED),
    ([1, 30], vf.BOUNDED),
    ([1, 40, 30], vf.BOUNDED),
    ([1, float("inf"), 2, 20], vf.DIVERGENT),
])
def test_divergence_verdict(values, expected):
    assert vf.divergence_verdict(values) == expected


def test_check_seed_is_stable_and_name_dependent():
    assert vf.check_seed(0, "a") == vf.check_seed(0, "a")
    assert vf.check_seed(0, "a") != vf.check_seed(0, "b")
    assert 0 <= vf.check_seed(2**40, "a") < 2**31


# -- WUB -----------------------------------------------------------------------------------


def test_identity_wub_stays_below_threshold():
    f = hm.make_map("identity")
    rep = vf.wub_check(f, count=2000)
    assert rep.sup <= 0.5 * (1 + 1e-12)
    assert rep.verdict == vf.BOUNDED


def test_scaling_preserves_r():
    f = hm.make_map("scaling", factor=3.0)
    X, Y = geo.sample_pairs_with_r_bound(f.domain, 0.5, 200, 0)
    assert np.allclose(vf.r_pairs(f.domain, X, Y), vf.r_pairs(f.image, f(X), f(Y)), rtol=1e-12)


def test_arg_map_witness_pairs_closed_form():
    f = hm.make_map("arg-map")
    rho = np.array([0.1, 0.01])
    X, Y = vf.arg_map_witness_pairs(rho)
    assert np.allclose(vf.r_pairs(f.domain, X, Y), 2.0)
    assert np.allclose(vf.r_pairs(f.image, f(X), f(Y)), math.pi / (math.sqrt(2) * rho))


def test_exp_map_witness_pairs_map_to_exp_minus_a():
    f = hm.make_map("exp-map")
    a = np.array([2.0, 5.0])
    X, Y = vf.exp_map_witness_pairs(a)
    assert np.allclose(f(X)[:, 0], np.exp(-a), rtol=1e-12)
    assert np.allclose(f(Y)[:, 0], np.exp(-2 * a), rtol=1e-12)


def test_image_domain_cloud_for_ball_maps():
    f = hm.make_map("poisson", n=2, seed=0)
    img = vf.image_domain_for(f)
    assert isinstance(img, geo.Generic)
    with pytest.raises(geo.DomainError):
        vf.image_domain_for(hm.make_map("poisson", n=3, seed=0))


# -- Lipschitz -----------------------------------------------------------------------------


def test_identity_lipschitz_ratios_are_one():
    f = hm.make_map("identity")
    rep = vf.k_lipschitz_estimate(f, point_count=100, pair_count=5)
    assert rep.point_sup == pytest.approx(1.0) and rep.point_inf == pytest.approx(1.0)
    assert rep.pair_sup == pytest.approx(1.0, rel=1e-3)


def test_scaling_bilipschitz_is_one_both_ways():
    fwd, inv = vf.bilipschitz_estimate(hm.make_map("scaling", factor=2.0), point_count=100, pair_count=5)
    assert fwd.point_sup == pytest.approx(1.0)
    assert inv.point_sup == pytest.approx(1.0)


def test_equivalence_scan_for_shear():
    rep = vf.thqh1_equivalence_scan(hm.make_map("shear", c=0.5), count=4, qmc_count=256)
    assert rep.sup["a_f"] == pytest.approx(1.0, rel=1e-12)
    assert rep.inf["A_f"] == pytest.approx(1.0, rel=1e-12)
    assert set(rep.verdicts.values()) == {"bounded"}


# -- H^3 example ----------------------------------------------------------------------------


def test_h3_with_zero_perturbation_is_identity():
    rep = vf.halfspace_harmonic_qi_check((0.0, 0.0), count=50)
    assert rep.status == "pass"
    assert rep.residuals["euclidean_lipschitz"] == 1.0
    assert rep.residuals["dilatation"] == 1.0


def test_h3_default_example_passes():
    rep = vf.halfspace_harmonic_qi_check(count=200)
    assert rep.status == "pass"
    assert rep.residuals["third_component_exact"]

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qhyp import distortion as dist
from qhyp import geometry as geo
from qhyp import harmonic as hm


def sweep_stretches(M, count=20001):
    """Oracle: max and min of |M u| over a dense sweep of planar unit vectors."""
    t = np.linspace(0, 2 * math.pi, count)
    U = np.stack([np.cos(t), np.sin(t)])
    s = np.linalg.norm(M @ U, axis=0)
    return s.max(), s.min()


# -- pointwise data ---------------------------------------------------------------------


def test_shear_derivative_data():
    f = hm.make_map("shear", c=0.5)
    D = dist.derivative_data(f, [0.1, 0.2])
    assert D.op_norm == pytest.approx(1.5, rel=1e-14)
    assert D.min_stretch == pytest.approx(0.5, rel=1e-14)
    assert D.jacobian == pytest.approx(0.75, rel=1e-14)


@pytest.mark.parametrize("name", ["arg-map", "log-map", "exp-map", "reim-map", "shear"])
def test_singular_values_match_direction_sweep(name):
    f = hm.make_map(name)
    for x in geo.sample_interior(f.domain, 5, 0, R=5.0):
        D = dist.derivative_data(f, x)
        hi, lo = sweep_stretches(D.matrix)
        assert D.op_norm == pytest.approx(hi, rel=1e-6)
        # in the plane min stretch = |det| / op norm; the sweep only brackets it
        assert D.min_stretch == pytest.approx(abs(np.linalg.det(D.matrix)) / hi, rel=1e-6)
        assert D.min_stretch <= lo * (1 + 1e-12)


def test_planar_quantities_agree_with_singular_values():
    f = hm.make_map("log-map")
    X = geo.sample_interior(f.domain, 50, 0)
    Lam, lam, nu = dist.planar_quantities(f, X)
    _, op, mn, _ = dist.derivative_arrays(f, X)
    assert np.allclose(Lam, op, rtol=1e-12)
    assert np.allclose(lam, mn, rtol=1e-10)
    assert np.all(np.abs(nu) < 1)


# -- dilatation -------------------------------------------------------------------------


def test_shear_dilatation_is_three():
    est = dist.dilatation_estimate(hm.make_map("shear", c=0.5), count=256)
    assert est.K == pytest.approx(3.0, rel=1e-12)
    assert est.K_O == pytest.approx(3.0, rel=1e-12)
    assert est.k_small == pytest.approx(0.5, rel=1e-12)


def test_identity_dilatation_is_one():
    assert dist.dilatation_estimate(hm.make_map("identity", n=3), count=64).K == 1.0


def test_log_map_dilatation_grows_with_truncation():
    Ks = [dist.dilatation_estimate(hm.make_map("log-map", s=s), count=2048, seed=0).K
          for s in (2.0, 8.0, 32.0)]
    assert Ks[0] < Ks[1] < Ks[2]


def test_arg_map_has_negative_jacobian():
    f = hm.make_map("arg-map")
    with pytest.raises(dist.NonpositiveJacobian) as info:
        dist.dilatation_estimate(f, count=64)
    assert info.value.value <= 0
    assert f.domain.contains(info.value.point[None])[0]


# -- Jacobian averages -------------------------------------------------------------------


def test_conformal_averages_of_linear_maps():
    ca = dist.conformal_averages(hm.make_map("shear", c=0.5), [0.1, 0.0], count=1024)
    assert ca.a_f == pytest.approx(math.sqrt(0.75), rel=1e-12)
    assert ca.A_f == pytest.approx(math.sqrt(0.75), rel=1e-12)
    ca3 = dist.conformal_averages(hm.make_map("scaling", factor=2.0, n=3), [0.0, 0.0, 0.2], count=512)
    assert ca3.a_f == pytest.approx(2.0, rel=1e-12)
    assert ca3.E_f == pytest.approx(8.0, rel=1e-12)


def test_conformal_average_radii():
    f = hm.make_map("shear", c=0.5)
    ca = dist.conformal_averages(f, [0.5, 0.0], count=256)
    assert ca.radius_a == pytest.approx(0.5)
    assert ca.radius_e == pytest.approx(0.25)


@settings(max_examples=15)
@given(st.integers(0, 10_000))
def test_average_exceeds_geometric_mean_on_common_ball(seed):
    # Jensen: the arithmetic mean of J dominates exp(mean log J) on the same ball
    f = hm.make_map("log-map")
    x = geo.sample_interior(f.domain, 1, seed)[0]
    d = float(f.domain.dist(x))
    ca = dist.conformal_averages(f, x, count=512, seed=seed, radius_a=d / 2, radius_e=d / 2)
    assert ca.A_f >= ca.a_f * (1 - 1e-12)


def test_jacobian_derivative_bounds_pass_on_log_map():
    rep = dist.jac_derivative_bounds_check(hm.make_map("log-map", s=4.0), count=64, qmc_count=1024,
                                           avg_points=4)
    assert rep.status == "pass", rep.witnesses


def test_astala_gehring_ratio_bounded_for_shear():
    rep = dist.astala_gehring_check(hm.make_map("shear", c=0.5), count=8, qmc_count=256)
    assert rep.status == "pass"
    assert 0 < rep.inf <= rep.sup < 100


# -- moduli and oscillation ---------------------------------------------------------------


def test_min_modulus_values():
    assert dist.min_modulus(hm.make_map("identity"), [0.1, 0.0], 0.3) == pytest.approx(0.3, rel=1e-12)
    assert dist.min_modulus(hm.make_map("scaling", factor=3.0), [0.0, 0.0], 0.5) == pytest.approx(1.5)
    assert dist.min_modulus(hm.make_map("shear", c=0.5), [0.0, 0.0], 0.4) == pytest.approx(0.2, rel=1e-8)


def test_min_modulus_rejects_large_sphere():
    with pytest.raises(geo.DomainError):
        dist.min_modulus(hm.make_map("identity"), [0.5, 0.0], 0.6)


def test_oscillation_constants_identity_and_constant():
    c = dist.oscillation_class_constants(hm.make_map("identity"), count=4, effort=256)
    assert c.c1_OC1 == pytest.approx(1.0, rel=1e-6)
    assert c.c_OC2 == 0.0 and c.a_SC2 == 0.0
    const = hm.DirectMap("constant", lambda X: 0 * X + 1.0, geo.Ball((0.0, 0.0), 1.0),
                         jac=lambda X: np.zeros(X.shape + (2,)))
    k = dist.oscillation_class_constants(const, count=3, effort=64)
    assert k.c1_OC1 == 0.0 and k.a_SC1 == 0.0


def test_laplacian_of_quadratic():
    f = hm.DirectMap("q", lambda X: np.stack([X[..., 0] ** 2, X[..., 1] ** 2], -1),
                     geo.Ball((0.0, 0.0), 1.0))
    assert dist.laplacian(f, [0.1, 0.2], 1e-3) == pytest.approx([2.0, 2.0], rel=1e-6)


# -- registry-wide invariant ---------------------------------------------------------------


@settings(max_examples=25)
@given(st.sampled_from(["log-map", "exp-map", "shear", "h3-map", "identity", "scaling", "affine"]),
       st.integers(0, 10_000))
def test_min_stretch_below_jacobian_root_below_op_norm(name, seed):
    f = hm.make_map(name)
    X = geo.sample_interior(f.domain, 8, seed, R=5.0)
    _, op, mn, J = dist.derivative_arrays(f, X)
    root = np.abs(J) ** (1 / X.shape[-1])
    assert np.all(mn <= root * (1 + 1e-12))
    assert np.all(root <= op * (1 + 1e-12))

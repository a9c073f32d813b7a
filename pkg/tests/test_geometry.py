import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qhyp import geometry as geo

DOMAINS = [
    geo.Ball((0.0, 0.0), 1.0),
    geo.Ball((1.0, -2.0, 0.5), 2.0),
    geo.HalfSpace(2),
    geo.HalfSpace(3),
    geo.PuncturedDisk(),
    geo.StripV(),
    geo.StripV(5.0),
    geo.ImageOfV(),
    geo.ArgImage(),
    geo.Polygon2D(((0.0, 0.0), (2.0, 0.0), (2.0, 1.0), (0.0, 1.0))),
]


def circle(t):
    th = 2 * math.pi * np.asarray(t)
    return np.stack([np.cos(th), np.sin(th)], axis=-1)


def dense_boundary_distance(X, curves, count=400_001):
    """Oracle: nearest point among a very dense boundary sample."""
    from scipy.spatial import cKDTree

    T = np.linspace(0.0, 1.0, count)
    C = np.vstack([c(T) for c in curves])
    return cKDTree(C).query(X)[0]


# -- closed-form distances --------------------------------------------------------


def test_ball_distance():
    B = geo.Ball((0.0, 0.0), 1.0)
    assert geo.dist_to_boundary(B, [0.0, 0.0]) == 1.0
    assert geo.dist_to_boundary(B, [0.25, 0.0]) == pytest.approx(0.75, abs=1e-15)


def test_halfspace_distance_is_last_coordinate():
    assert geo.dist_to_boundary(geo.HalfSpace(3), [4.0, -7.0, 0.3]) == 0.3


def test_punctured_disk_distance():
    D = geo.PuncturedDisk()
    assert geo.dist_to_boundary(D, [0.1, 0.0]) == pytest.approx(0.1)
    assert geo.dist_to_boundary(D, [0.0, 0.8]) == pytest.approx(0.2)


def test_strip_v_distance():
    V = geo.StripV()
    assert geo.dist_to_boundary(V, [5.0, 0.3]) == pytest.approx(0.3)
    assert geo.dist_to_boundary(V, [1.2, 0.5]) == pytest.approx(0.2)
    assert geo.dist_to_boundary(geo.StripV(3.0), [2.9, 0.5]) == pytest.approx(0.1)


def test_arg_image_distance():
    A = geo.ArgImage()
    assert geo.dist_to_boundary(A, [math.pi / 2, 5.0]) == pytest.approx(math.pi / 2)
    assert geo.dist_to_boundary(A, [0.1, 5.0]) == pytest.approx(0.1)
    assert geo.dist_to_boundary(A, [1.0, 0.2]) == pytest.approx(0.2)


def test_image_of_v_interior_point_not_on_boundary():
    # (0.5, 1) lies in fV: the curve passes at u = log(1.25) < 0.5 at v = 1
    W = geo.ImageOfV()
    assert W.contains(np.array([[0.5, 1.0]]))[0]
    assert geo.dist_to_boundary(W, [0.5, 1.0]) > 0.2


def test_image_of_v_matches_dense_boundary():
    W = geo.ImageOfV()
    curves = [
        lambda t: np.stack([np.log1p((2 * t) ** 2 / 4), 2 * t], -1),
        lambda t: np.stack([20 * t, 0 * t], -1),
        lambda t: np.stack([math.log(2) + 20 * t, 2 + 0 * t], -1),
    ]
    X = geo.sample_interior(W, 300, 3, R=6.0)
    assert np.abs(W.dist(X) - dense_boundary_distance(X, curves)).max() < 1e-6


def test_polygon_distance_and_membership():
    P = DOMAINS[-1]
    assert P.contains(np.array([[1.0, 0.5], [3.0, 0.5]])).tolist() == [True, False]
    assert geo.dist_to_boundary(P, [1.0, 0.25]) == pytest.approx(0.25)


def test_generic_circle_agrees_with_ball():
    G = geo.Generic(curves=(circle,))
    X = geo.sample_interior(geo.Ball((0.0, 0.0), 1.0), 500, 1)
    assert np.abs(G.dist(X) - (1 - np.linalg.norm(X, axis=1))).max() < 1e-10


def test_generic_gradient_matches_finite_differences():
    G = geo.Generic(curves=(lambda t: np.stack([2 * np.cos(2 * math.pi * t), np.sin(2 * math.pi * t)], -1),))
    X = geo.sample_interior(G, 200, 2)
    d, g = G.sdist_grad(X)
    d2, g2 = geo.Domain.sdist_grad(G, X)
    assert np.abs(d - d2).max() == 0
    assert np.abs(g - g2).max() < 1e-4


def test_point_outside_raises():
    with pytest.raises(geo.PointNotInDomain):
        geo.dist_to_boundary(geo.Ball((0.0, 0.0), 1.0), [2.0, 0.0])
    with pytest.raises(geo.PointNotInDomain):
        geo.dist_to_boundary(geo.PuncturedDisk(), [0.0, 0.0])


# -- grammar ---------------------------------------------------------------------


@pytest.mark.parametrize("dom", DOMAINS, ids=lambda d: d.spec)
def test_spec_round_trip(dom):
    assert geo.parse_domain(dom.spec) == dom


@pytest.mark.parametrize("text", ["", "ball 0 0", "halfspace 2.5", "strip-v 1 2", "cube 1", "ball a b c"])
def test_parse_errors(text):
    with pytest.raises(geo.DomainError):
        geo.parse_domain(text)


# -- sampling ----------------------------------------------------------------------


@pytest.mark.parametrize("dom", DOMAINS, ids=lambda d: d.spec)
def test_samples_are_interior_and_seeded(dom):
    X = geo.sample_interior(dom, 200, 7)
    assert X.shape == (200, dom.dim)
    assert dom.contains(X).all()
    assert np.array_equal(X, geo.sample_interior(dom, 200, 7))


def test_samples_are_nested_in_count():
    dom = geo.StripV()
    assert np.array_equal(geo.sample_interior(dom, 50, 3), geo.sample_interior(dom, 500, 3)[:50])


def test_pairs_respect_r_bound():
    X, Y = geo.sample_pairs_with_r_bound(geo.Ball((0.0, 0.0), 1.0), 0.5, 500, 0)
    assert geo.r_quantity_arrays(geo.Ball((0.0, 0.0), 1.0), X, Y).max() <= 0.5


def test_near_boundary_sampling_hits_band():
    dom = geo.HalfSpace(2)
    X = geo.sample_near_boundary(dom, 1e-3, 1e-2, 100, 0)
    d = dom.dist(X)
    assert d.min() >= 1e-3 and d.max() < 1e-2


def test_qmc_ball_points_inside_unit_ball():
    for n in (2, 3):
        U = geo.unit_ball_qmc(n, 1000, 0)
        assert np.linalg.norm(U, axis=1).max() < 1
        S = geo.unit_sphere_points(n, 100)
        assert np.allclose(np.linalg.norm(S, axis=1), 1)


# -- properties ------------------------------------------------------------------------


@given(st.sampled_from(DOMAINS), st.integers(0, 10_000))
def test_distance_is_one_lipschitz(dom, seed):
    X = geo.sample_interior(dom, 20, seed, R=5.0)
    Y = geo.sample_interior(dom, 20, seed + 1, R=5.0)
    lhs = np.abs(dom.dist(X) - dom.dist(Y))
    assert np.all(lhs <= np.linalg.norm(X - Y, axis=1) * (1 + 1e-9) + 1e-12)


@given(st.sampled_from(DOMAINS), st.integers(0, 10_000))
def test_ball_of_radius_d_is_inside(dom, seed):
    X = geo.sample_interior(dom, 10, seed, R=5.0)
    d = dom.dist(X)
    U = geo.unit_sphere_points(dom.dim, 32)
    for x, r in zip(X, d):
        assert dom.contains(x + 0.999 * r * U).all()

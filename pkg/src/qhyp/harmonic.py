"""Harmonic maps in closed form or as Poisson extensions of boundary data.

The Schwarz-type gradient estimates live here too.  One compares the
derivative at a ball centre with the sup over the sphere, the other works on
B(x, d(x)/4).  The planar bound |f(z)| <= (4/pi) arctan|z| is checked on a
polar grid.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import minimize

from . import geometry as geo
from .geometry import Ball, Domain, DomainError
from .reports import NUMERICAL_FAILURE, PASS, VIOLATION, VerificationReport, witness


class HarmonicityError(RuntimeError):
    pass


def unit_ball_volume(n: int) -> float:
    return math.pi ** (n / 2) / math.gamma(n / 2 + 1)


# -- maps ----------------------------------------------------------------------


class Map:
    """Vectorised map R^n -> R^n on a declared source domain.

    Subclasses implement ``__call__`` and ``jacobian`` on arrays of shape (..., n).
    """

    name = "map"
    dim = 2
    domain: Domain | None = None
    image: Domain | None = None
    analytic_jacobian = False
    params: dict = {}

    def __call__(self, X):
        raise NotImplementedError

    def jacobian(self, X):
        return fd_jacobian(self, X)

    def image_domain(self) -> Domain:
        if self.image is None:
            raise DomainError(f"image domain unavailable for {self.name}")
        return self.image


def fd_jacobian(f, X, domain=None, rel_step=1e-5):
    """Central-difference Jacobian with step rel_step * d(x) (or rel_step if no domain)."""
    X = np.asarray(X, float)
    dom = domain if domain is not None else getattr(f, "domain", None)
    n = X.shape[-1]
    if dom is not None:
        h = rel_step * dom.dist(X)
    else:
        h = np.full(X.shape[:-1], rel_step)
    if np.any(h < 1e-300):
        raise DomainError("finite-difference step underflow near the boundary")
    cols = []
    for i in range(n):
        e = np.zeros(n)
        e[i] = 1.0
        step = h[..., None] * e
        cols.append((f(X + step) - f(X - step)) / (2 * h)[..., None])
    return np.stack(cols, axis=-1)


class PlanarHarmonicMap(Map):
    """f = h + conj(g) with closed-form h, h', g, g' on complex arrays."""

    analytic_jacobian = True
    dim = 2

    def __init__(self, name, h, dh, g, dg, domain, image=None, params=None, cite=""):
        self.name = name
        self.h, self.dh, self.g, self.dg = h, dh, g, dg
        self.domain = domain
        self.image = image
        self.params = dict(params or {})
        self.cite = cite

    @staticmethod
    def _z(X):
        X = np.asarray(X, float)
        return X[..., 0] + 1j * X[..., 1]

    def __call__(self, X):
        Z = self._z(X)
        F = self.h(Z) + np.conj(self.g(Z))
        return np.stack([F.real, F.imag], axis=-1)

    def derivs(self, X):
        """(h'(z), g'(z)) as complex arrays."""
        Z = self._z(X)
        return self.dh(Z) + 0 * Z, self.dg(Z) + 0 * Z

    def jacobian(self, X):
        a, gp = self.derivs(X)
        b = np.conj(gp)
        fx = a + b
        fy = 1j * (a - b)
        return np.stack([np.stack([fx.real, fy.real], -1), np.stack([fx.imag, fy.imag], -1)], -2)

    def second_dilatation(self, X):
        """nu = g'/h' (the consistent reading of the planar dilatation)."""
        a, gp = self.derivs(X)
        if np.any(a == 0):
            raise ZeroDivisionError("h'(z) = 0")
        return gp / a


class DirectMap(Map):
    def __init__(self, name, fn, domain, jac=None, image=None, dim=None, params=None, cite=""):
        self.name = name
        self.fn = fn
        self.jac = jac
        self.domain = domain
        self.image = image
        self.dim = dim or domain.dim
        self.analytic_jacobian = jac is not None
        self.params = dict(params or {})
        self.cite = cite

    def __call__(self, X):
        return self.fn(np.asarray(X, float))

    def jacobian(self, X):
        if self.jac is not None:
            return self.jac(np.asarray(X, float))
        return fd_jacobian(self, X)


# -- Poisson kernel and extension ---------------------------------------------------


def poisson_kernel(n: int, r: float, x, xi) -> np.ndarray:
    """(r^2 - |x|^2) / (n omega_n r |x - xi|^n) for a ball centred at 0."""
    x, xi = np.asarray(x, float), np.asarray(xi, float)
    if np.any(np.linalg.norm(x, axis=-1) >= r):
        raise DomainError("x must lie strictly inside the ball")
    if np.any(np.abs(np.linalg.norm(xi, axis=-1) - r) > 1e-10 * r):
        raise DomainError("xi must lie on the sphere")
    return _kernel(n, r, x, xi)


def _sq_dist(x, xi):
    q2 = 0.0
    for j in range(x.shape[-1]):
        q2 = q2 + (x[..., j] - xi[..., j]) ** 2
    return q2


def _kernel(n, r, x, xi):
    q2 = _sq_dist(x, xi)
    scale = n * unit_ball_volume(n) * r
    num = r * r - (x * x).sum(-1)
    return num / (scale * (q2 if n == 2 else q2 ** (n / 2)))


def _kernel_grad(n, r, x, xi):
    D = x - xi
    q = np.linalg.norm(D, axis=-1)
    c = 1.0 / (n * unit_ball_volume(n) * r)
    a = (r * r - (x * x).sum(-1))
    return c * (-2 * x / (q**n)[..., None] - n * a[..., None] * D / (q ** (n + 2))[..., None])


def kernel_gradient_at_center(n: int, r: float, xi) -> np.ndarray:
    xi = np.asarray(xi, float)
    if abs(np.linalg.norm(xi) - r) > 1e-10 * r:
        raise DomainError("xi must lie on the sphere")
    return xi / (unit_ball_volume(n) * r ** (n + 1))


def sphere_quadrature(n: int, r: float, level: int = 1):
    """Nodes on S^{n-1}(0, r) and surface weights.

    n = 2: uniform trapezoid (1024 * level nodes); n = 3: Gauss-Legendre in
    cos(theta) times uniform phi (64 * level by 128 * level).
    """
    if n == 2:
        N = 1024 * level
        th = 2 * math.pi * np.arange(N) / N
        P = r * np.column_stack([np.cos(th), np.sin(th)])
        return P, np.full(N, 2 * math.pi * r / N)
    if n == 3:
        nt, nphi = 64 * level, 128 * level
        z, wz = np.polynomial.legendre.leggauss(nt)
        ph = 2 * math.pi * np.arange(nphi) / nphi
        s = np.sqrt(1 - z * z)
        P = np.stack([np.outer(s, np.cos(ph)), np.outer(s, np.sin(ph)),
                      np.outer(z, np.ones(nphi))], axis=-1).reshape(-1, 3)
        w = np.outer(wz, np.full(nphi, 2 * math.pi / nphi)).ravel()
        return r * P, r * r * w
    raise ValueError("Poisson quadrature implemented for n in {2, 3}")


def _level_for(n, delta):
    # trapezoid error ~ exp(-N delta); the 3D product rule is given the same budget per axis
    need = (40.0 / delta) / 1024 if n == 2 else (24.0 / delta) / 64
    level = 1
    while level < need:
        level *= 2
    limit = 1024 if n == 2 else 32
    if level > limit:
        raise DomainError("point too close to the sphere for Poisson quadrature")
    return level


@dataclass
class BoundaryData:
    """Vector-valued data on S^{n-1}(center, radius); ``fn`` takes absolute points."""

    center: tuple
    radius: float
    fn: Callable
    name: str = "data"
    meta: dict = field(default_factory=dict)

    @property
    def dim(self):
        return len(self.center)

    def __call__(self, P):
        return np.asarray(self.fn(np.asarray(P, float)), float)


def trig_boundary_data(coeffs, center=(0.0, 0.0), radius=1.0, const=(0.0, 0.0), name="trig"):
    """Planar data sum_k a_k cos(k t) + b_k sin(k t); coeffs has shape (K, 2, 2)."""
    coeffs = np.asarray(coeffs, float)
    c = np.asarray(center, float)
    const = np.asarray(const, float)

    def fn(P):
        D = P - c
        t = np.arctan2(D[..., 1], D[..., 0])
        k = np.arange(1, len(coeffs) + 1)
        C, S = np.cos(t[..., None] * k), np.sin(t[..., None] * k)
        return const + C @ coeffs[:, 0, :] + S @ coeffs[:, 1, :]

    return BoundaryData(tuple(c), float(radius), fn, name, {"coeffs": coeffs.tolist()})


def random_boundary_data(n: int, seed: int, degree: int = 4, sup: float = 0.95,
                         centered: bool = True, radius: float = 1.0) -> BoundaryData:
    """Smooth random data with sampled sup-norm ``sup``; mean zero when centered."""
    rng = np.random.default_rng(seed)
    if n == 2:
        coeffs = rng.standard_normal((degree, 2, 2)) / np.arange(1, degree + 1)[:, None, None]
        const = np.zeros(2) if centered else rng.standard_normal(2)
        data = trig_boundary_data(coeffs, (0.0, 0.0), radius, const)
        P = radius * geo.unit_sphere_points(2, 8192)
    else:
        powers = [(a, b, c) for a in range(degree + 1) for b in range(degree + 1 - a)
                  for c in range(degree + 1 - a - b) if a + b + c >= 1]
        coef = rng.standard_normal((len(powers), n))
        pw = np.array(powers)

        def raw(P):
            U = P / radius
            # monomials from per-coordinate power tables
            T = [U[..., j, None] ** np.arange(degree + 1) for j in range(3)]
            return (T[0][..., pw[:, 0]] * T[1][..., pw[:, 1]] * T[2][..., pw[:, 2]]) @ coef

        Q, w = sphere_quadrature(3, radius)
        mean = (w @ raw(Q)) / w.sum() if centered else np.zeros(n)

        def fn(P, raw=raw, mean=mean):
            return raw(P) - mean

        data = BoundaryData((0.0,) * n, float(radius), fn, "poly", {"powers": powers})
        P = radius * geo.unit_sphere_points(3, 20000)
    scale = sup / np.linalg.norm(data(P), axis=-1).max()
    inner = data.fn
    data.fn = lambda Q, inner=inner, scale=scale: scale * inner(Q)
    data.meta.update({"seed": seed, "sup": sup, "centered": centered})
    return data


_CHUNK = 2_000_000


class PoissonExtension(Map):
    """Harmonic extension of BoundaryData into its ball (continuous on the closed ball)."""

    analytic_jacobian = True

    def __init__(self, data: BoundaryData, name="poisson", params=None):
        self.data = data
        self.name = name
        self.dim = data.dim
        self.domain = Ball(data.center, data.radius)
        self.image = None
        self.params = dict(params or {})

    def _groups(self, X):
        c = np.array(self.data.center)
        Y = X.reshape(-1, self.dim) - c
        rr = np.linalg.norm(Y, axis=-1)
        r = self.data.radius
        on = rr >= r * (1 - 1e-12)
        delta = np.where(on, 1.0, (r - rr) / r)
        levels = np.array([_level_for(self.dim, d) if not o else 0 for d, o in zip(delta, on)])
        return Y, on, levels

    def _integrate(self, X, grad):
        X = np.asarray(X, float)
        shape = X.shape[:-1]
        Y, on, levels = self._groups(X)
        c = np.array(self.data.center)
        r = self.data.radius
        out = np.zeros((len(Y), self.dim, self.dim) if grad else (len(Y), self.dim))
        if np.any(on) and not grad:
            out[on] = self.data(c + Y[on] * (r / np.linalg.norm(Y[on], axis=-1))[:, None])
        elif np.any(on):
            raise DomainError("derivative requested on the sphere")
        for lev in np.unique(levels[~on]):
            sel = np.flatnonzero((levels == lev) & ~on)
            P, w = sphere_quadrature(self.dim, r, int(lev))
            vals = self.data(c + P)
            # bound the (points x nodes) work arrays to about _CHUNK elements
            chunk = max(1, _CHUNK // len(P))
            step = min(len(P), _CHUNK)
            for st in range(0, len(sel), chunk):
                idx = sel[st: st + chunk]
                for q0 in range(0, len(P), step):
                    Pq, wq, vq = P[q0: q0 + step], w[q0: q0 + step], vals[q0: q0 + step]
                    if grad:
                        Kg = _kernel_grad(self.dim, r, Y[idx, None, :], Pq[None])
                        out[idx] += np.einsum("mqj,q,qk->mkj", Kg, wq, vq)
                    else:
                        K = _kernel(self.dim, r, Y[idx, None, :], Pq[None])
                        out[idx] += (K * wq) @ vq
        return out.reshape(shape + out.shape[1:])

    def __call__(self, X):
        return self._integrate(X, grad=False)

    def jacobian(self, X):
        return self._integrate(X, grad=True)


def poisson_extend(data: BoundaryData, x) -> np.ndarray:
    c = np.array(data.center)
    if np.linalg.norm(np.asarray(x, float) - c) >= data.radius:
        raise DomainError("x must lie strictly inside the ball")
    return PoissonExtension(data)(x)


# -- derivatives and residuals ----------------------------------------------------


def map_derivative_at(f: Map, x) -> np.ndarray:
    x = np.asarray(x, float)
    if f.domain is not None:
        f.domain.dist(x)
    return f.jacobian(x)


def harmonicity_residual(f: Map, X, rel_step: float | None = None) -> np.ndarray:
    """Scale-free Laplacian residual d(x) |Delta f(x)| / |f'(x)| per point.

    The Laplacian is the central-difference divergence of the analytic Jacobian
    when available, otherwise the (2n+1)-point stencil on f, with step
    rel_step * d(x) (default 1e-4 with an analytic Jacobian, 1e-3 otherwise).
    """
    if rel_step is None:
        rel_step = 1e-4 if f.analytic_jacobian else 1e-3
    X = np.atleast_2d(np.asarray(X, float))
    n = X.shape[-1]
    d = f.domain.dist(X)
    h = rel_step * d
    lap = np.zeros(X.shape)
    if f.analytic_jacobian:
        for i in range(n):
            e = np.zeros(n)
            e[i] = 1.0
            Jp = f.jacobian(X + h[:, None] * e)
            Jm = f.jacobian(X - h[:, None] * e)
            lap += (Jp[..., :, i] - Jm[..., :, i]) / (2 * h)[:, None]
    else:
        F0 = f(X)
        for i in range(n):
            e = np.zeros(n)
            e[i] = 1.0
            lap += (f(X + h[:, None] * e) + f(X - h[:, None] * e) - 2 * F0) / (h * h)[:, None]
    scale = np.linalg.norm(f.jacobian(X), ord=2, axis=(-2, -1))
    return d * np.linalg.norm(lap, axis=-1) / np.maximum(scale, 1e-300)


# -- suprema over balls and spheres --------------------------------------------------


@dataclass
class SupEstimate:
    value: float
    residual: float
    argmax: np.ndarray


def oscillation_estimate(f: Map, x, radius: float, effort: int = 4096, seed: int = 0,
                         sphere: bool = False, values: Callable | None = None) -> SupEstimate:
    """sup |f(y) - f(x)| over the closed ball (or sphere) B(x, radius).

    Low-discrepancy sampling followed by Nelder-Mead refinement around the best
    sample; ``residual`` is the gain of the refinement step.  ``values`` can
    replace f for evaluation (e.g. boundary data on the sphere).
    """
    x = np.asarray(x, float)
    n = x.shape[-1]
    if f.domain is not None:
        d = f.domain.dist(x)
        if radius > d * (1 + 1e-12):
            raise DomainError("ball exits the source domain")
    ev = values or f
    fx = np.asarray(f(x), float)
    if sphere:
        U = geo.unit_sphere_points(n, effort)
    else:
        U = np.vstack([geo.unit_ball_qmc(n, effort, seed), geo.unit_sphere_points(n, max(effort // 4, 8))])
    vals = np.linalg.norm(ev(x + radius * U) - fx, axis=-1)
    k = int(np.argmax(vals))
    best = float(vals[k])

    def proj(v):
        nv = np.linalg.norm(v)
        if sphere:
            return v / nv if nv > 0 else U[k]
        return v / nv if nv > 1 else v

    def neg(v):
        return -float(np.linalg.norm(ev(x + radius * proj(v)) - fx))

    simplex = U[k] + 0.05 * np.vstack([np.zeros(n), np.eye(n)])
    res = minimize(neg, U[k], method="Nelder-Mead",
                   options={"initial_simplex": simplex, "xatol": 1e-10, "fatol": 1e-14, "maxiter": 400})
    refined = max(best, -float(res.fun))
    arg = x + radius * (proj(res.x) if -res.fun >= best else U[k])
    return SupEstimate(refined, refined - best, arg)


def oscillation(f: Map, x, radius: float, effort: int = 4096, seed: int = 0) -> float:
    return oscillation_estimate(f, x, radius, effort, seed).value


def _sphere_values(f: Map, center, radius):
    # a Poisson extension on its own sphere is its boundary data
    if isinstance(f, PoissonExtension) and np.allclose(center, f.data.center) \
            and abs(radius - f.data.radius) <= 1e-12 * radius:
        return f.data
    return None


def gradient_bound_check(f: Map, center=None, radius=None, points=None, effort: int = 4096,
                         seed: int = 0, tol: float = 1e-8, residual_tol: float = 1e-6,
                         harmonicity_points: int = 32) -> VerificationReport:
    """r |h'(a)| <= n M*_a at a ball centre and d(x)|h'(x)|/4 <= n omega_h(x) at points."""
    n = f.dim
    dom = f.domain
    if center is None and isinstance(dom, Ball):
        center, radius = np.array(dom.center), dom.radius
    probe = geo.sample_interior(dom, harmonicity_points, seed) if harmonicity_points else None
    if probe is not None:
        if isinstance(dom, Ball):
            # keep the residual probe where the base quadrature level suffices
            c = np.array(dom.center)
            probe = c + 0.5 * (probe - c)
        hres = harmonicity_residual(f, probe)
        if hres.max() > residual_tol:
            raise HarmonicityError(f"harmonicity residual {hres.max():.3g} exceeds {residual_tol}")
    rows, wit = [], []
    if center is not None:
        center = np.asarray(center, float)
        est = oscillation_estimate(f, center, radius, effort, seed, sphere=True,
                                   values=_sphere_values(f, center, radius))
        lhs = radius * np.linalg.norm(f.jacobian(center), ord=2)
        rhs = n * (est.value + est.residual)
        rows.append((lhs, rhs))
        if lhs > rhs + tol:
            wit.append(witness(center, None, kind="sphere", lhs=lhs, rhs=rhs))
    if points is not None:
        P = np.atleast_2d(np.asarray(points, float))
        d = dom.dist(P)
        J = f.jacobian(P)
        for i, x in enumerate(P):
            est = oscillation_estimate(f, x, d[i] / 4, effort, seed)
            lhs = 0.25 * d[i] * np.linalg.norm(J[i], ord=2)
            rhs = n * (est.value + est.residual)
            rows.append((lhs, rhs))
            if lhs > rhs + tol:
                wit.append(witness(x, None, kind="inner", lhs=lhs, rhs=rhs))
    rows = np.array(rows)
    ratio = rows[:, 0] / np.maximum(rows[:, 1], 1e-300)
    return VerificationReport(
        check_name="gradient-bound",
        params={"map": f.name, "n": n, "effort": effort},
        n_samples=len(rows),
        sup=float(ratio.max()),
        inf=float(ratio.min()),
        witnesses=wit,
        residuals={"margin_min": float((rows[:, 1] - rows[:, 0]).min())},
        verdict="no-violations" if not wit else f"{len(wit)} violations",
        status=PASS if not wit else VIOLATION,
    )


def planar_schwarz_check(f: Map, n_r: int = 64, n_theta: int = 256,
                         tol: float = 1e-12) -> VerificationReport:
    """|f(z)| <= (4/pi) arctan|z| on a polar grid, for f: D -> D harmonic with f(0) = 0."""
    f0 = np.linalg.norm(f(np.zeros(2)))
    r = (np.arange(n_r) + 1.0) / (n_r + 1.0)
    th = 2 * math.pi * np.arange(n_theta) / n_theta
    R, T = np.meshgrid(r, th, indexing="ij")
    Z = np.stack([R * np.cos(T), R * np.sin(T)], axis=-1).reshape(-1, 2)
    mod = np.linalg.norm(f(Z), axis=-1)
    bound = (4 / math.pi) * np.arctan(R.ravel())
    slack = bound - mod
    params = {"map": f.name, "grid": [n_r, n_theta]}
    if f0 > 1e-10 or mod.max() > 1.0:
        return VerificationReport("planar-schwarz", params, len(Z), float(mod.max()), float(slack.min()),
                                  [], {"f0": float(f0)}, "range assumption violated", NUMERICAL_FAILURE)
    bad = np.flatnonzero(slack < -tol)
    wit = [witness(Z[i], None, modulus=mod[i], bound=bound[i]) for i in bad[:10]]
    return VerificationReport(
        check_name="planar-schwarz",
        params=params,
        n_samples=len(Z),
        sup=float(mod.max()),
        inf=float(slack.min()),
        witnesses=wit,
        residuals={"f0": float(f0)},
        verdict="no-violations" if not len(bad) else f"{len(bad)} violations",
        status=PASS if not len(bad) else VIOLATION,
    )


# -- registry ----------------------------------------------------------------------


def _arg_map():
    return PlanarHarmonicMap(
        "arg-map",
        h=lambda z: -0.5j * np.log(z) + 0.5 * z, dh=lambda z: -0.5j / z + 0.5,
        g=lambda z: -0.5j * np.log(z) - 0.5 * z, dg=lambda z: -0.5j / z - 0.5,
        domain=geo.HalfSpace(2), image=geo.ArgImage(), cite="f(z) = arg z + i Im z")


def _reim_map():
    return PlanarHarmonicMap(
        "reim-map",
        h=lambda z: -0.25j * z * z + 0.5 * z, dh=lambda z: -0.5j * z + 0.5,
        g=lambda z: -0.25j * z * z - 0.5 * z, dg=lambda z: -0.5j * z - 0.5,
        domain=geo.HalfSpace(2), image=geo.HalfSpace(2), cite="f(z) = Re z Im z + i Im z")


def _log_map(s=None):
    m = PlanarHarmonicMap(
        "log-map",
        h=lambda z: np.log(z) + z, dh=lambda z: 1 + 1 / z,
        g=lambda z: np.log(z) - z, dg=lambda z: -1 + 1 / z,
        domain=geo.StripV(s), params={"s": s}, cite="f(z) = log|z|^2 + 2iy")
    if s is None:
        m.image = geo.ImageOfV()
    else:
        s = float(s)

        def side(a, b):
            return lambda t: m(np.column_stack([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]))

        corners = [(1, 0), (s, 0), (s, 1), (1, 1)]
        curves = tuple(side(corners[i], corners[(i + 1) % 4]) for i in range(4))
        m.image = geo.Generic(curves=curves, name=f"log-map image of strip-v {s:g}")
    return m


def _exp_map():
    def h(z):
        return np.exp((z + 1) / (z - 1))

    return PlanarHarmonicMap(
        "exp-map", h=h, dh=lambda z: h(z) * (-2) / (z - 1) ** 2,
        g=lambda z: 0 * z, dg=lambda z: 0 * z,
        domain=geo.Ball((0.0, 0.0), 1.0), image=geo.PuncturedDisk(),
        cite="f(z) = exp((z+1)/(z-1))")


def _shear(c=0.5, c_im=0.0, radius=1.0):
    c = complex(c, c_im)
    if not abs(c) < 1:
        raise ValueError("shear needs |c| < 1")
    m = PlanarHarmonicMap(
        "shear", h=lambda z: z, dh=lambda z: 1 + 0 * z,
        g=lambda z: np.conj(c) * z, dg=lambda z: np.conj(c) + 0 * z,
        domain=geo.Ball((0.0, 0.0), radius), params={"c": c.real, "c_im": c.imag, "radius": radius},
        cite="f(z) = z + c conj(z)")

    def inside(W):
        w = W[..., 0] + 1j * W[..., 1]
        z = (w - c * np.conj(w)) / (1 - abs(c) ** 2)
        return np.abs(z) < radius

    def curve(t):
        z = radius * np.exp(2j * math.pi * np.asarray(t))
        w = z + c * np.conj(z)
        return np.stack([w.real, w.imag], axis=-1)

    m.image = geo.Generic(inside=inside, curves=(curve,), name=f"ellipse image of shear {c}")
    return m


def _identity(n=2, radius=1.0):
    n = int(n)
    dom = geo.Ball((0.0,) * n, radius)
    return DirectMap("identity", lambda X: X.copy(), dom,
                     jac=lambda X: np.broadcast_to(np.eye(n), X.shape + (n,)).copy(),
                     image=dom, params={"n": n, "radius": radius})


def _scaling(factor=2.0, n=2, radius=1.0):
    n = int(n)
    dom = geo.Ball((0.0,) * n, radius)
    return DirectMap("scaling", lambda X: factor * X, dom,
                     jac=lambda X: np.broadcast_to(factor * np.eye(n), X.shape + (n,)).copy(),
                     image=geo.Ball((0.0,) * n, factor * radius),
                     params={"factor": factor, "n": n, "radius": radius})


def _affine(a11=1.0, a12=0.5, a21=0.0, a22=1.0, b1=0.0, b2=0.0):
    A = np.array([[a11, a12], [a21, a22]], float)
    b = np.array([b1, b2], float)
    if abs(np.linalg.det(A)) < 1e-12:
        raise ValueError("affine map needs an invertible matrix")
    Ainv = np.linalg.inv(A)
    dom = geo.Ball((0.0, 0.0), 1.0)

    def curve(t):
        th = 2 * math.pi * np.asarray(t)
        return np.stack([np.cos(th), np.sin(th)], -1) @ A.T + b

    image = geo.Generic(inside=lambda W: np.linalg.norm((W - b) @ Ainv.T, axis=-1) < 1,
                        curves=(curve,), name="affine image of the unit disk")
    return DirectMap("affine", lambda X: X @ A.T + b, dom,
                     jac=lambda X: np.broadcast_to(A, X.shape + (2,)).copy(), image=image,
                     params=dict(a11=a11, a12=a12, a21=a21, a22=a22, b1=b1, b2=b2))


def _h3_map(eps1=0.1, eps2=0.1):
    e3 = np.array([0.0, 0.0, 1.0])

    def fn(X):
        U0 = 1.0 / np.linalg.norm(X + e3, axis=-1)
        out = X.copy()
        out[..., 0] += eps1 * U0
        out[..., 1] += eps2 * U0
        return out

    def jac(X):
        Y = X + e3
        q = np.linalg.norm(Y, axis=-1)
        gU = -Y / (q**3)[..., None]
        J = np.broadcast_to(np.eye(3), X.shape + (3,)).copy()
        J[..., 0, :] += eps1 * gU
        J[..., 1, :] += eps2 * gU
        return J

    return DirectMap("h3-map", fn, geo.HalfSpace(3), jac=jac, image=geo.HalfSpace(3),
                     params={"eps1": eps1, "eps2": eps2},
                     cite="h(x) = (x1 + eps1 U0, x2 + eps2 U0, x3), U0 = 1/|x + e3|")


def _poisson(n=2, seed=0, degree=4, sup=0.95):
    data = random_boundary_data(int(n), int(seed), int(degree), float(sup))
    return PoissonExtension(data, params={"n": int(n), "seed": int(seed), "degree": int(degree)})


@dataclass(frozen=True)
class MapRegistryEntry:
    name: str
    constructor: Callable
    citation: str

    def build(self, **params) -> Map:
        return self.constructor(**params)


_REGISTRY = (
    MapRegistryEntry("arg-map", _arg_map, "harmonic map of H^2 onto the half-strip {0<u<pi, v>0}"),
    MapRegistryEntry("reim-map", _reim_map, "harmonic self-map of H^2"),
    MapRegistryEntry("log-map", _log_map, "h = log z + z, g = log z - z on V (or V_s)"),
    MapRegistryEntry("exp-map", _exp_map, "analytic map of D onto D \\ {0}"),
    MapRegistryEntry("h3-map", _h3_map, "harmonic quasiconformal self-map of H^3"),
    MapRegistryEntry("shear", _shear, "harmonic qc map of D onto an ellipse"),
    MapRegistryEntry("identity", _identity, "identity on a ball"),
    MapRegistryEntry("scaling", _scaling, "x -> factor x on a ball"),
    MapRegistryEntry("affine", _affine, "x -> A x + b on the unit disk"),
    MapRegistryEntry("poisson", _poisson, "Poisson extension of random smooth boundary data"),
)


def registry() -> list:
    return list(_REGISTRY)


def make_map(name: str, **params) -> Map:
    for entry in _REGISTRY:
        if entry.name == name:
            return entry.build(**params)
    raise KeyError(f"unknown map {name!r}")

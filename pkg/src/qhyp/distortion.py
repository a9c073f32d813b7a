"""Pointwise distortion of maps and averages of their Jacobians.

Radius conventions (each overridable):

* ``a_f`` averages log J over B(x, d(x));
* ``E_f`` averages J over B(x, d(x)/2), and A_f = E_f^(1/n);
* the first-order oscillation class uses B(x, d(x)/2).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from . import geometry as geo
from .geometry import DomainError
from .harmonic import Map, PlanarHarmonicMap, fd_jacobian
from .reports import PASS, VIOLATION, VerificationReport, plain, witness


class NonpositiveJacobian(RuntimeError):
    """Raised with the offending point when J_f <= 0 where positivity is required."""

    def __init__(self, point, value):
        super().__init__(f"J_f = {value:.6g} <= 0 at {np.asarray(point).tolist()}")
        self.point = np.asarray(point, float)
        self.value = float(value)


# -- pointwise derivative data -----------------------------------------------------


def singular_values(M) -> np.ndarray:
    """Singular values in decreasing order along the last axis."""
    return np.linalg.svd(np.asarray(M, float), compute_uv=False)


@dataclass(frozen=True)
class DerivativeData:
    matrix: np.ndarray
    op_norm: float
    min_stretch: float
    jacobian: float

    def to_record(self):
        return plain({"matrix": self.matrix, "op_norm": self.op_norm,
                      "min_stretch": self.min_stretch, "jacobian": self.jacobian})


def derivative_arrays(f: Map, X):
    """(matrices, op_norm, min_stretch, J) for an array of points."""
    M = f.jacobian(np.asarray(X, float))
    s = singular_values(M)
    return M, s[..., 0], s[..., -1], np.linalg.det(M)


def derivative_data(f: Map, x) -> DerivativeData:
    x = np.asarray(x, float)
    if f.domain is not None:
        f.domain.dist(x)
    M, op, mn, J = derivative_arrays(f, x)
    return DerivativeData(M, float(op), float(mn), float(J))


def _require_positive(J, X):
    bad = np.flatnonzero(~(J > 0))
    if len(bad):
        i = bad[0]
        raise NonpositiveJacobian(X[i], J[i])


# -- dilatation ------------------------------------------------------------------------


@dataclass
class DilatationEstimate:
    """Sampled suprema; these are lower bounds for the true dilatations."""

    K_O: float
    K_I: float
    K: float
    k_small: float
    n_samples: int
    seed: int
    argmax: list = field(default_factory=list)

    def to_record(self):
        return plain(self.__dict__)


def dilatation_from_arrays(op, mn, J, n):
    KO = op**n / J
    KI = J / mn**n
    return KO, KI


def dilatation_estimate(f: Map, domain=None, count: int = 4096, seed: int = 0,
                        points=None) -> DilatationEstimate:
    dom = domain if domain is not None else f.domain
    X = np.atleast_2d(points) if points is not None else geo.sample_interior(dom, count, seed)
    _, op, mn, J = derivative_arrays(f, X)
    _require_positive(J, X)
    n = X.shape[-1]
    KO, KI = dilatation_from_arrays(op, mn, J, n)
    # pointwise ratios are >= 1 exactly; clip the roundoff below it
    K_O, K_I = max(float(KO.max()), 1.0), max(float(KI.max()), 1.0)
    K = max(K_O, K_I)
    return DilatationEstimate(K_O, K_I, K, (K - 1) / (K + 1), len(X), seed,
                              [X[int(KO.argmax())], X[int(KI.argmax())]])


def planar_quantities(f: PlanarHarmonicMap, z):
    """(Lambda_f, lambda_f, nu) with nu = g'/h'."""
    a, b = f.derivs(np.asarray(z, float))
    Lam = np.abs(a) + np.abs(b)
    lam = np.abs(a) - np.abs(b)
    return Lam, lam, f.second_dilatation(z)


# -- Jacobian averages -----------------------------------------------------------------


@dataclass
class ConformalAverages:
    a_f: float
    E_f: float
    A_f: float
    nodes: int
    radius_a: float
    radius_e: float
    stderr_log: float
    stderr_E: float

    def to_record(self):
        return plain(self.__dict__)


def _ball_jacobians(f, x, radius, count, seed):
    U = geo.unit_ball_qmc(len(x), count, seed)
    P = x + radius * U
    _, _, _, J = derivative_arrays(f, P)
    _require_positive(J, P)
    return J


def conformal_averages(f: Map, x, domain=None, count: int = 2**16, seed: int = 0,
                       radius_a: float | None = None, radius_e: float | None = None) -> ConformalAverages:
    """a_f over B(x, d(x)), E_f and A_f over B(x, d(x)/2) by quasi-Monte-Carlo."""
    x = np.asarray(x, float)
    dom = domain if domain is not None else f.domain
    d = float(dom.dist(x))
    ra = d if radius_a is None else radius_a
    re = d / 2 if radius_e is None else radius_e
    n = len(x)
    Ja = _ball_jacobians(f, x, ra, count, seed)
    Je = Ja if re == ra else _ball_jacobians(f, x, re, count, seed)
    logJ = np.log(Ja)
    a_f = math.exp(logJ.mean() / n)
    E_f = float(Je.mean())
    return ConformalAverages(a_f, E_f, E_f ** (1.0 / n), count, ra, re,
                             float(logJ.std() / math.sqrt(count)), float(Je.std() / math.sqrt(count)))


def astala_gehring_check(f: Map, domain=None, image=None, count: int = 64, seed: int = 0,
                         qmc_count: int = 4096, points=None) -> VerificationReport:
    """Ratio a_f(x) d(x) / d(f(x), boundary of image); report-only (no constant is prescribed)."""
    dom = domain if domain is not None else f.domain
    img = image if image is not None else f.image_domain()
    X = np.atleast_2d(points) if points is not None else geo.sample_interior(dom, count, seed)
    d = dom.dist(X)
    dstar = img.dist(f(X))
    af = np.array([conformal_averages(f, x, dom, qmc_count, seed).a_f for x in X])
    ratio = af * d / dstar
    finite = bool(np.all(np.isfinite(ratio)) and ratio.min() > 0)
    i, j = int(ratio.argmax()), int(ratio.argmin())
    return VerificationReport(
        check_name="astala-gehring",
        params={"map": f.name, "domain": dom.spec, "qmc_count": qmc_count},
        n_samples=len(X), sup=float(ratio.max()), inf=float(ratio.min()),
        witnesses=[witness(X[i], None, ratio=ratio[i]), witness(X[j], None, ratio=ratio[j])],
        residuals={"empirical_c": float(max(ratio.max(), 1 / ratio.min()))},
        verdict="bounded" if finite else "unbounded",
        status=PASS if finite else VIOLATION,
    )


def jac_derivative_bounds_check(f: PlanarHarmonicMap, domain=None, count: int = 256, seed: int = 0,
                                qmc_count: int = 4096, avg_points: int = 16,
                                margin: float = 1e-8) -> VerificationReport:
    """(1-k^2)|h'|^2 <= J <= K|h'|^2 and sqrt(1-k^2)|h'| <= a_h <= sqrt(K)|h'|.

    K is the sampled dilatation over every point where the inequalities are
    evaluated, including the quadrature nodes of a_h, so K is at least the
    pointwise dilatation wherever it is used.  The a_h comparisons get an
    extra allowance of 5 quasi-Monte-Carlo standard errors of mean(log J).
    """
    dom = domain if domain is not None else f.domain
    X = geo.sample_interior(dom, count, seed)
    XA = X[:avg_points]
    d = dom.dist(XA)
    U = geo.unit_ball_qmc(2, qmc_count, seed)
    nodes = (XA[:, None, :] + d[:, None, None] * U[None]).reshape(-1, 2)
    K = dilatation_estimate(f, points=np.vstack([X, nodes])).K
    k = (K - 1) / (K + 1)
    hp = np.abs(f.derivs(X)[0])
    _, _, _, J = derivative_arrays(f, X)
    lo = (1 - k * k) * hp**2
    hi = K * hp**2
    scale = np.maximum(hp**2, 1e-300)
    v_lo = (lo - J) / scale > margin
    v_hi = (J - hi) / scale > margin
    wit = [witness(X[i], None, kind="jacobian-lower", gap=(lo - J)[i]) for i in np.flatnonzero(v_lo)[:5]]
    wit += [witness(X[i], None, kind="jacobian-upper", gap=(J - hi)[i]) for i in np.flatnonzero(v_hi)[:5]]
    gaps = []
    for x in XA:
        ca = conformal_averages(f, x, dom, qmc_count, seed)
        h1 = float(np.abs(f.derivs(x)[0]))
        allow = margin + 5 * ca.stderr_log
        low_a, high_a = math.sqrt(1 - k * k) * h1, math.sqrt(K) * h1
        if low_a > ca.a_f * math.exp(allow):
            wit.append(witness(x, None, kind="average-lower", a_h=ca.a_f, bound=low_a))
        if ca.a_f > high_a * math.exp(allow):
            wit.append(witness(x, None, kind="average-upper", a_h=ca.a_f, bound=high_a))
        gaps.append(ca.a_f / low_a - 1)
    left_gap = np.abs(J - lo) / scale
    return VerificationReport(
        check_name="jacobian-derivative-bounds",
        params={"map": f.name, "domain": dom.spec, "K": K, "k": k},
        n_samples=len(X) + len(XA),
        sup=float((J / scale).max()), inf=float((J / scale).min()),
        witnesses=wit,
        residuals={"left_gap_max": float(left_gap.max()), "left_gap_min": float(left_gap.min()),
                   "average_gap_max": float(max(gaps))},
        verdict="no-violations" if not wit else f"{len(wit)} violations",
        status=PASS if not wit else VIOLATION,
    )


# -- moduli on spheres and oscillation classes ----------------------------------------


def min_modulus_estimate(f: Map, x, r: float, effort: int = 1024):
    """(m_f(x, r), refinement gain): min |f(y) - f(x)| over |y - x| = r."""
    x = np.asarray(x, float)
    if f.domain is not None and r >= f.domain.dist(x):
        raise DomainError("sphere exits the source domain")
    n = len(x)
    U = geo.unit_sphere_points(n, effort)
    fx = f(x)
    vals = np.linalg.norm(f(x + r * U) - fx, axis=-1)
    k = int(vals.argmin())
    best = float(vals[k])

    def obj(v):
        nv = np.linalg.norm(v)
        u = v / nv if nv > 0 else U[k]
        return float(np.linalg.norm(f(x + r * u) - fx))

    res = minimize(obj, U[k], method="Nelder-Mead",
                   options={"initial_simplex": U[k] + 0.02 * np.vstack([np.zeros(n), np.eye(n)]),
                            "xatol": 1e-12, "fatol": 1e-15, "maxiter": 400})
    value = min(best, float(res.fun))
    return value, best - value


def min_modulus(f: Map, x, r: float, effort: int = 1024) -> float:
    return min_modulus_estimate(f, x, r, effort)[0]


def image_diameter(f: Map, x, radius: float, effort: int = 512) -> float:
    """osc over B(x, radius): sampled sup |f(y) - f(z)| for y, z in the closed ball."""
    x = np.asarray(x, float)
    n = len(x)
    U = np.vstack([geo.unit_sphere_points(n, effort), geo.unit_ball_qmc(n, effort // 2, 0)])
    F = f(x + radius * U)
    diff = F[:, None, :] - F[None, :, :]
    return float(np.sqrt((diff * diff).sum(-1)).max())


def centred_oscillation(f: Map, x, radius: float, effort: int = 512) -> float:
    """omega_f(x, r) = sup |f(y) - f(x)| over the closed ball (sampled)."""
    x = np.asarray(x, float)
    n = len(x)
    U = np.vstack([geo.unit_sphere_points(n, effort), geo.unit_ball_qmc(n, effort // 2, 0)])
    return float(np.linalg.norm(f(x + radius * U) - f(x), axis=-1).max())


def laplacian(f: Map, x, step: float) -> np.ndarray:
    x = np.asarray(x, float)
    n = len(x)
    E = np.eye(n) * step
    P = np.vstack([x + E, x - E, x[None]])
    F = f(P)
    return (F[:n].sum(0) + F[n:2 * n].sum(0) - 2 * n * F[-1]) / step**2


def _ratio(num, den):
    if den > 0:
        return num / den
    return 0.0 if num == 0 else math.inf


@dataclass
class OscillationConstants:
    c1_OC1: float
    a_SC1: float
    c_OC2: float
    a_SC2: float
    n_samples: int
    unreliable: int
    flagged: list = field(default_factory=list)

    def to_record(self):
        return plain(self.__dict__)


def oscillation_class_constants(f: Map, domain=None, count: int = 32, seed: int = 0,
                                effort: int = 512, points=None) -> OscillationConstants:
    """Sampled constants for the first and second order oscillation classes.

    osc over a ball is the diameter of its image (sup over pairs), so the
    identity has c1 = 1.  Laplacians use the (2n+1)-point stencil with step
    1e-3 d(x); a sample whose half-step value disagrees by more than 1e-4
    (relative to |f'(x)|/d(x)) is counted as numerically unreliable and skipped
    for the second-order constants.
    """
    dom = domain if domain is not None else f.domain
    X = np.atleast_2d(points) if points is not None else geo.sample_interior(dom, count, seed)
    c1 = aS1 = c2 = aS2 = 0.0
    unreliable, flagged = 0, []
    for x in X:
        d = float(dom.dist(x))
        op = float(np.linalg.norm(f.jacobian(x), ord=2))
        osc = image_diameter(f, x, d / 2, effort)
        c1 = max(c1, _ratio(d * op, osc))
        for r in (d / 8, d / 4, d / 2):
            aS1 = max(aS1, _ratio(r * op, centred_oscillation(f, x, r, effort)))
        L1 = laplacian(f, x, 1e-3 * d)
        L2 = laplacian(f, x, 5e-4 * d)
        lap = np.linalg.norm(L2)
        if np.linalg.norm(L1 - L2) > 1e-4 * max(op / d, 1e-300) and lap > 1e-4 * op / d:
            unreliable += 1
            flagged.append(x)
            continue
        c2 = max(c2, _ratio(d * d * lap, osc))
        for r in (d / 8, d / 4, d / 2):
            U = geo.unit_ball_qmc(len(x), effort, 0)
            sup_grad = float(np.linalg.norm(f.jacobian(x + r * U), ord=2, axis=(-2, -1)).max())
            aS2 = max(aS2, _ratio(r * lap, sup_grad))
    return OscillationConstants(c1, aS1, c2, aS2, len(X), unreliable, flagged[:10])


__all__ = [
    "NonpositiveJacobian", "DerivativeData", "DilatationEstimate", "ConformalAverages",
    "OscillationConstants", "singular_values", "derivative_arrays", "derivative_data",
    "dilatation_estimate", "planar_quantities", "conformal_averages", "astala_gehring_check",
    "jac_derivative_bounds_check", "min_modulus", "min_modulus_estimate", "image_diameter",
    "centred_oscillation", "laplacian", "oscillation_class_constants", "fd_jacobian",
]

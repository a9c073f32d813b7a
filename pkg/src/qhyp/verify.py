"""Empirical checks of distortion results for harmonic and quasiconformal maps.

Every check here is a falsification test on a documented sample: a finite
supremum is reported as bounded evidence, never as a proof.
"""
from __future__ import annotations

import math
import zlib
from dataclasses import dataclass, field

import numpy as np

from . import distortion as dist
from . import geometry as geo
from . import harmonic as harm
from . import metrics as met
from .geometry import DomainError
from .harmonic import Map
from .reports import NUMERICAL_FAILURE, PASS, VIOLATION, VerificationReport, plain, witness

BOUNDED = "bounded-evidence"
DIVERGENT = "divergence-evidence"


def check_seed(seed: int, name: str) -> int:
    """Per-check seed: top-level seed plus a stable hash of the check name."""
    return (int(seed) + zlib.crc32(name.encode())) % 2**31


def image_domain_for(f: Map, boundary_points: int = 4096):
    """Analytic image when the registry supplies one; otherwise a boundary-image cloud.

    The cloud is only available for planar ball domains, where the boundary
    circle is pushed forward by f (continuous extension assumed).
    """
    if f.image is not None:
        return f.image
    dom = f.domain
    if isinstance(dom, geo.Ball) and dom.dim == 2:
        c, r = np.array(dom.center), dom.radius

        def curve(t):
            th = 2 * math.pi * np.asarray(t)
            return f(c + r * np.stack([np.cos(th), np.sin(th)], -1))

        return geo.Generic(curves=(curve,), cloud_size=boundary_points, name=f"image cloud of {f.name}")
    raise DomainError("image-domain-unavailable")


def divergence_verdict(values) -> str:
    """Divergent iff strictly increasing over >= 3 scales with last/first >= 10."""
    v = [x for x in values if np.isfinite(x)]
    if len(v) >= 3 and all(b > a for a, b in zip(v, v[1:])) and v[-1] >= 10 * v[0]:
        return DIVERGENT
    return BOUNDED


# -- weak uniform boundedness --------------------------------------------------------


@dataclass
class WUBReport:
    threshold: float
    n_pairs: int
    sup: float
    witnesses: list
    per_scale: list
    verdict: str

    def to_report(self, name="wub", params=None, status=PASS) -> VerificationReport:
        return VerificationReport(
            check_name=name, params=dict(params or {}, threshold=self.threshold),
            n_samples=self.n_pairs, sup=self.sup,
            inf=min((s["sup"] for s in self.per_scale), default=math.nan),
            witnesses=self.witnesses, residuals={"per_scale": self.per_scale},
            verdict=self.verdict, status=status)


def _pairs_at_scale(domain, scale, threshold, count, seed):
    """x with d(x) within half a decade of ``scale``; y with r_G(x, y) <= threshold."""
    lo, hi = scale / math.sqrt(10), scale * math.sqrt(10)
    X = geo.sample_near_boundary(domain, lo, hi, count, seed)
    rng = np.random.default_rng(seed + 1)
    dx = domain.dist(X)
    # |y - x| <= t d(x)/(1+t) keeps d(y) >= d(x)/(1+t), hence r_G <= t
    U = geo._uniform_ball(rng, count, domain.dim)
    Y = X + (threshold / (1 + threshold)) * dx[:, None] * U
    keep = domain.contains(Y)
    return X[keep], Y[keep]


def r_pairs(domain, X, Y):
    return geo.r_quantity_arrays(domain, X, Y)


def wub_check(f: Map, domain=None, image=None, count: int = 10_000, seed: int = 0,
              threshold: float = 0.5, scales=None, extra_pairs=None) -> WUBReport:
    """sup r_{fG}(fx, fy) over sampled pairs with r_G(x, y) <= threshold.

    Without ``scales`` the pairs are drawn from the truncated domain and binned
    by the decade of d(x); with ``scales`` each value s gets its own sample of
    x with d(x) in [s/sqrt(10), s*sqrt(10)].  ``extra_pairs`` (X, Y) are added
    to the sample and to the bin of the nearest scale.
    """
    dom = domain if domain is not None else f.domain
    img = image if image is not None else image_domain_for(f)
    if scales is None:
        X, Y = geo.sample_pairs_with_r_bound(dom, threshold, count, seed)
    else:
        per = max(count // len(scales), 1)
        parts = [_pairs_at_scale(dom, s, threshold, per, seed + i) for i, s in enumerate(scales)]
        X = np.vstack([p[0] for p in parts])
        Y = np.vstack([p[1] for p in parts])
    if extra_pairs is not None:
        X = np.vstack([X, np.atleast_2d(extra_pairs[0])])
        Y = np.vstack([Y, np.atleast_2d(extra_pairs[1])])
    rG = r_pairs(dom, X, Y)
    keep = rG <= threshold * (1 + 1e-12)
    X, Y, rG = X[keep], Y[keep], rG[keep]
    rF = r_pairs(img, f(X), f(Y))
    dx = dom.dist(X)
    if scales is None:
        keys = np.floor(np.log10(dx)).astype(int)
        groups = [(10.0 ** k, keys == k) for k in sorted(set(keys.tolist()), reverse=True)]
    else:
        sc = np.array(scales, float)
        idx = np.argmin(np.abs(np.log10(dx)[:, None] - np.log10(sc)[None]), axis=1)
        order = np.argsort(-sc)
        groups = [(float(sc[i]), idx == i) for i in order]
    per_scale = [{"scale": s, "count": int(m.sum()), "sup": float(rF[m].max())}
                 for s, m in groups if m.any()]
    top = np.argsort(-rF)[:10]
    wit = [witness(X[i], Y[i], r_G=rG[i], r_fG=rF[i]) for i in top]
    verdict = divergence_verdict([s["sup"] for s in per_scale])
    return WUBReport(threshold, len(X), float(rF.max()), wit, per_scale, verdict)


# -- Lipschitz estimates in quasihyperbolic metrics ---------------------------------


@dataclass
class LipschitzReport:
    point_sup: float
    point_inf: float
    lower_sup: float
    lower_inf: float
    pair_sup: float
    pair_inf: float
    n_points: int
    n_pairs: int
    solver_residual: float
    witnesses: list = field(default_factory=list)

    def to_report(self, name, params=None, verdict="bounded-evidence", status=PASS):
        return VerificationReport(
            check_name=name, params=dict(params or {}), n_samples=self.n_points + self.n_pairs,
            sup=self.point_sup, inf=self.lower_inf, witnesses=self.witnesses,
            residuals=plain({k: v for k, v in self.__dict__.items() if k != "witnesses"}),
            verdict=verdict, status=status)


def pointwise_ratios(f: Map, dom, img, X):
    """d(x)|f'(x)|/d*(fx) and d(x) l(f'(x))/d*(fx)."""
    _, op, mn, _ = dist.derivative_arrays(f, X)
    q = dom.dist(X) / img.dist(f(X))
    return q * op, q * mn


def pair_k_ratios(f: Map, dom, img, X, Y, opts=None):
    """k_{G'}(fx, fy) / k_G(x, y) with the larger solver residual of the two."""
    opts = opts or met.SolverOptions(seeding="straight", max_iters=20, descent_iters=100)
    kG = met.quasihyp_dist_many(dom, X, Y, opts)
    kF = met.quasihyp_dist_many(img, f(X), f(Y), opts)
    a = np.array([r.distance for r in kG])
    b = np.array([r.distance for r in kF])
    res = max(max(r.residual for r in kG), max(r.residual for r in kF))
    return b / a, a, b, res


def k_lipschitz_estimate(f: Map, domain=None, image=None, point_count: int = 1000,
                         pair_count: int = 100, seed: int = 0, pair_r: float = 1.0,
                         opts=None, points=None, pairs=None) -> LipschitzReport:
    dom = domain if domain is not None else f.domain
    img = image if image is not None else image_domain_for(f)
    X = np.atleast_2d(points) if points is not None else geo.sample_interior(dom, point_count, seed)
    up, low = pointwise_ratios(f, dom, img, X)
    if pairs is None:
        PX, PY = geo.sample_pairs_with_r_bound(dom, pair_r, pair_count, seed + 1)
    else:
        PX, PY = (np.atleast_2d(p) for p in pairs)
    if len(PX):
        ratio, kG, kF, res = pair_k_ratios(f, dom, img, PX, PY, opts)
        i = int(np.argmax(ratio))
        wit = [witness(X[int(up.argmax())], None, pointwise=up.max()),
               witness(PX[i], PY[i], k_G=kG[i], k_fG=kF[i], ratio=ratio[i])]
        psup, pinf = float(ratio.max()), float(ratio.min())
    else:
        res, psup, pinf, wit = 0.0, math.nan, math.nan, []
    return LipschitzReport(float(up.max()), float(up.min()), float(low.max()), float(low.min()),
                           psup, pinf, len(X), len(PX), float(res), wit)


def bilipschitz_estimate(f: Map, domain=None, image=None, point_count: int = 1000,
                         pair_count: int = 100, seed: int = 0, opts=None, pair_r: float = 1.0):
    """(forward, inverse) reports; the inverse side uses l(f') pointwise."""
    dom = domain if domain is not None else f.domain
    img = image if image is not None else image_domain_for(f)
    X = geo.sample_interior(dom, point_count, seed)
    _, _, mn, _ = dist.derivative_arrays(f, X)
    if np.any(mn <= 0):
        i = int(np.argmin(mn))
        raise dist.NonpositiveJacobian(X[i], mn[i])
    PX, PY = geo.sample_pairs_with_r_bound(dom, pair_r, pair_count, seed + 1)
    if np.any(np.all(f(PX) == f(PY), axis=-1) & np.any(PX != PY, axis=-1)):
        raise ValueError("map is not injective on the sampled pairs")
    fwd = k_lipschitz_estimate(f, dom, img, points=X, pairs=(PX, PY), opts=opts, seed=seed)
    inv_point = 1.0 / np.array([fwd.lower_inf, fwd.lower_sup])
    inv = LipschitzReport(float(inv_point[0]), float(inv_point[1]), float(1 / fwd.point_inf),
                          float(1 / fwd.point_sup), float(1 / fwd.pair_inf), float(1 / fwd.pair_sup),
                          fwd.n_points, fwd.n_pairs, fwd.solver_residual, [])
    return fwd, inv


# -- pseudo-isometry fit -----------------------------------------------------------


@dataclass
class PseudoIsometryFit:
    a: float
    b: float
    slack: float
    n_pairs: int
    witnesses: list = field(default_factory=list)

    def to_record(self):
        return plain(self.__dict__)


def pseudo_isometry_fit(dM, dN, slack: float = 0.0) -> PseudoIsometryFit:
    """Smallest a >= 1 with d_N <= a d_M, then smallest b >= 0 with d_M/a - b <= d_N."""
    dM, dN = np.asarray(dM, float), np.asarray(dN, float)
    if len(dM) < 10:
        raise ValueError("pseudo-isometry fit needs at least 10 pairs")
    if np.any(dM < 0) or np.any(dN < 0):
        raise ValueError("distances must be nonnegative")
    zero = (dM == 0) & (dN > 0)
    if zero.any():
        i = int(np.flatnonzero(zero)[0])
        return PseudoIsometryFit(math.inf, 0.0, slack, len(dM), [{"index": i, "d_M": 0.0, "d_N": float(dN[i])}])
    pos = dM > 0
    slope = dN[pos] / dM[pos]
    a = max(1.0, float(slope.max()) if pos.any() else 1.0)
    gap = dM / a - dN
    b = max(0.0, float(gap.max()) - slack)
    ia = int(np.flatnonzero(pos)[int(slope.argmax())]) if pos.any() else 0
    ib = int(gap.argmax())
    return PseudoIsometryFit(a, b, slack, len(dM), [
        {"index": ia, "d_M": float(dM[ia]), "d_N": float(dN[ia])},
        {"index": ib, "d_M": float(dM[ib]), "d_N": float(dN[ib])}])


# -- Jacobian equivalences -------------------------------------------------------------


@dataclass
class EquivalenceReport:
    ratios: dict
    sup: dict
    inf: dict
    verdicts: dict
    n_samples: int

    def to_report(self, name="jacobian-equivalences", params=None, status=PASS):
        return VerificationReport(
            check_name=name, params=dict(params or {}), n_samples=self.n_samples,
            sup=max(self.sup.values()), inf=min(self.inf.values()), witnesses=[],
            residuals={"sup": self.sup, "inf": self.inf, "verdicts": self.verdicts},
            verdict="bounded" if all(v == "bounded" for v in self.verdicts.values()) else "unbounded",
            status=status)


def thqh1_equivalence_scan(f: Map, domain=None, image=None, count: int = 32, seed: int = 0,
                           qmc_count: int = 4096, points=None) -> EquivalenceReport:
    """J^(1/n) d/d*, J^(1/n)/a_f and J^(1/n)/A_f at sampled points."""
    dom = domain if domain is not None else f.domain
    img = image if image is not None else image_domain_for(f)
    X = np.atleast_2d(points) if points is not None else geo.sample_interior(dom, count, seed)
    n = X.shape[-1]
    _, _, _, J = dist.derivative_arrays(f, X)
    dist._require_positive(J, X)
    Jn = J ** (1.0 / n)
    avg = [dist.conformal_averages(f, x, dom, qmc_count, seed) for x in X]
    ratios = {
        "distance": Jn * dom.dist(X) / img.dist(f(X)),
        "a_f": Jn / np.array([c.a_f for c in avg]),
        "A_f": Jn / np.array([c.A_f for c in avg]),
    }
    sup = {k: float(v.max()) for k, v in ratios.items()}
    inf = {k: float(v.min()) for k, v in ratios.items()}
    verdicts = {k: "bounded" if np.all(np.isfinite(v)) and inf[k] > 0 else "unbounded"
                for k, v in ratios.items()}
    return EquivalenceReport(plain(ratios), sup, inf, verdicts, len(X))


# -- the H^3 example ----------------------------------------------------------------


def halfspace_harmonic_qi_check(eps=(0.1, 0.1), count: int = 1000, seed: int = 0,
                                residual_tol: float = 1e-6) -> VerificationReport:
    """h(x) = (x1 + e1 U0, x2 + e2 U0, x3) on truncated H^3: exact third component,
    harmonicity, Euclidean bi-Lipschitz constants and the density criterion
    |h'(x)|/h3(x) <= c/x3."""
    f = harm.make_map("h3-map", eps1=eps[0], eps2=eps[1])
    X = geo.sample_interior(f.domain, count, seed)
    F = f(X)
    third_exact = bool(np.array_equal(F[:, 2], X[:, 2]))
    hres = harm.harmonicity_residual(f, X)
    _, op, mn, J = dist.derivative_arrays(f, X)
    density_c = float((op * X[:, 2] / F[:, 2]).max())
    density_low = float((mn * X[:, 2] / F[:, 2]).min())
    ok = third_exact and hres.max() <= residual_tol and mn.min() > 0 and np.isfinite(op.max()) \
        and J.min() > 0
    wit = []
    if not third_exact:
        i = int(np.argmax(np.abs(F[:, 2] - X[:, 2])))
        wit.append(witness(X[i], None, kind="third-component", value=F[i, 2]))
    if hres.max() > residual_tol:
        i = int(hres.argmax())
        wit.append(witness(X[i], None, kind="harmonicity", residual=hres[i]))
    if J.min() <= 0:
        i = int(J.argmin())
        wit.append(witness(X[i], None, kind="jacobian", J=J[i]))
    return VerificationReport(
        check_name="h3-example",
        params={"eps": list(eps), "count": count},
        n_samples=count, sup=float(op.max()), inf=float(mn.min()), witnesses=wit,
        residuals={"harmonicity_max": float(hres.max()), "third_component_exact": third_exact,
                   "euclidean_lipschitz": float(op.max()), "euclidean_inverse_lipschitz": float(1 / mn.min()),
                   "density_c": density_c, "density_lower": density_low,
                   "dilatation": dist.dilatation_estimate(f, points=X).K},
        verdict="quasi-isometry-evidence" if ok else "failed",
        status=PASS if ok else VIOLATION,
    )


# -- helpers for the counterexamples --------------------------------------------------


def arg_map_witness_pairs(rho):
    """z = rho e^{i pi/4}, rho e^{3i pi/4}: r_G = 2 and r_{fG} = pi/(sqrt 2 rho)."""
    rho = np.atleast_1d(np.asarray(rho, float))
    s = math.sqrt(0.5)
    X = np.column_stack([rho * s, rho * s])
    Y = np.column_stack([-rho * s, rho * s])
    return X, Y


def exp_map_witness_pairs(a):
    """Pairs mapped to exp(-a) and exp(-2a) by exp((z+1)/(z-1)).

    z = (w+1)/(w-1) for w = -a, -2a lies on (0, 1) and tends to 1 as a grows.
    """
    a = np.atleast_1d(np.asarray(a, float))
    z1 = (a - 1) / (a + 1)
    z2 = (2 * a - 1) / (2 * a + 1)
    return np.column_stack([z1, 0 * z1]), np.column_stack([z2, 0 * z2])


def exp_map_divergence(scales=(15.0, 90.0, 340.0), opts=None) -> VerificationReport:
    """Pairwise k-ratio of exp((z+1)/(z-1)) along pairs approaching z = 1.

    The image points sit as close as exp(-2a) to the puncture, so the image
    domain is used with an interior tolerance far below the default.
    """
    f = harm.make_map("exp-map")
    img = geo.PuncturedDisk(interior_tol=1e-305)
    X, Y = exp_map_witness_pairs(scales)
    ratio, kG, kF, res = pair_k_ratios(f, f.domain, img, X, Y, opts)
    verdict = divergence_verdict(ratio)
    exceeds = bool(ratio.max() > 100)
    ok = verdict == DIVERGENT and exceeds
    return VerificationReport(
        check_name="exp-map-divergence",
        params={"scales": list(scales)},
        n_samples=len(X), sup=float(ratio.max()), inf=float(ratio.min()),
        witnesses=[witness(X[i], Y[i], a=scales[i], k_G=kG[i], k_fG=kF[i], ratio=ratio[i])
                   for i in range(len(X))],
        residuals={"solver_residual": float(res), "exceeds_100": exceeds},
        verdict=verdict, status=PASS if ok else VIOLATION)


def lipschitz_wub_coherence(f: Map, domain=None, image=None, count: int = 2000,
                            seed: int = 0, wub_count: int = 10_000) -> VerificationReport:
    """WUB sup <= exp(c2) - 1 where c2 is the sampled pointwise Lipschitz sup.

    The pointwise sample includes every pair endpoint of the WUB sample.
    """
    dom = domain if domain is not None else f.domain
    img = image if image is not None else image_domain_for(f)
    w = wub_check(f, dom, img, wub_count, seed)
    X, Y = geo.sample_pairs_with_r_bound(dom, 0.5, wub_count, seed)
    P = np.vstack([geo.sample_interior(dom, count, seed + 1), X, Y])
    up, _ = pointwise_ratios(f, dom, img, P)
    c2 = float(up.max())
    bound = math.exp(c2) - 1
    ok = w.sup <= bound
    return VerificationReport(
        check_name=f"lipschitz-wub-coherence-{f.name}",
        params={"map": f.name, "domain": dom.spec},
        n_samples=w.n_pairs + len(P), sup=w.sup, inf=bound,
        witnesses=w.witnesses[:3],
        residuals={"c2": c2, "bound": bound, "wub_sup": w.sup},
        verdict="coherent" if ok else "incoherent", status=PASS if ok else VIOLATION)


def run_paper_suite(config=None, only=None) -> dict:
    """Aggregated report of every acceptance check (see :mod:`qhyp.suite`)."""
    from .suite import run_paper_suite as _run

    return _run(config, only)

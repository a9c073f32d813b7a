"""The full verification suite behind ``qhyp suite paper``, keyed by check name.

Each check draws its randomness from ``check_seed(cfg.seed, name)`` so that
checks are independent of each other and of execution order.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import __version__
from . import distortion as dist
from . import geometry as geo
from . import harmonic as harm
from . import metrics as met
from . import verify as ver
from .config import RunConfig
from .reports import NUMERICAL_FAILURE, PASS, VIOLATION, VerificationReport, combine_status, witness


def _report(name, params, n, values, wit, residuals, ok, verdict_ok="no-violations"):
    values = np.asarray(values, float) if len(values) else np.array([math.nan])
    return VerificationReport(name, params, int(n), float(np.nanmax(values)), float(np.nanmin(values)),
                              wit, residuals, verdict_ok if ok else "violations", PASS if ok else VIOLATION)


# -- geodesic oracles ------------------------------------------------------------------


def check_halfspace_geodesics(cfg: RunConfig, seed: int) -> VerificationReport:
    opts = met.SolverOptions(seed=seed, R=cfg.R, delta=cfg.delta)
    errs, wit = [], []
    for n, count in ((2, cfg.geodesic_pairs_2), (3, cfg.geodesic_pairs_3)):
        dom = geo.HalfSpace(n)
        P = geo.sample_interior(dom, 2 * count, seed + n, cfg.R, cfg.delta)
        for x, y in zip(P[:count], P[count:]):
            k = met.quasihyp_dist(dom, x, y, opts).distance
            exact = met.hyp_dist_halfspace(x, y)
            e = abs(k - exact) / exact
            errs.append(e)
            if e > cfg.tol_geodesic:
                wit.append(witness(x, y, solver=k, exact=exact, rel_err=e))
    ok = not wit
    return _report("halfspace-geodesic-oracle", {"pairs": [cfg.geodesic_pairs_2, cfg.geodesic_pairs_3],
                                                 "tol": cfg.tol_geodesic},
                   len(errs), errs, wit, {"max_rel_err": max(errs)}, ok)


def check_ball_radial(cfg: RunConfig, seed: int) -> VerificationReport:
    dom = geo.Ball((0.0, 0.0), 1.0)
    errs, wit = [], []
    for t in (0.25, 0.5, 0.9):
        k = met.quasihyp_dist(dom, [0.0, 0.0], [t, 0.0], met.SolverOptions(seed=seed)).distance
        exact = -math.log1p(-t)
        e = abs(k - exact) / exact
        errs.append(e)
        if e > cfg.tol_geodesic:
            wit.append(witness([0, 0], [t, 0], solver=k, exact=exact))
    return _report("ball-radial-oracle", {"t": [0.25, 0.5, 0.9], "tol": cfg.tol_geodesic},
                   3, errs, wit, {"max_rel_err": max(errs)}, not wit)


def _jk(dom, cfg, seed, name):
    half = cfg.jk_pairs // 2
    P = geo.sample_interior(dom, 2 * half, seed, cfg.R, cfg.delta)
    X2, Y2 = geo.sample_pairs_with_r_bound(dom, 0.5, cfg.jk_pairs - half, seed + 1, cfg.R, cfg.delta)
    X = np.vstack([P[:half], X2])
    Y = np.vstack([P[half:], Y2])
    rep = met.check_jk_inequalities(dom, X, Y, margin=cfg.tol_margin)
    rep.check_name = name
    return rep


def check_jk_ball(cfg, seed):
    return _jk(geo.Ball((0.0, 0.0), 1.0), cfg, seed, "jk-inequalities-ball")


def check_jk_strip(cfg, seed):
    return _jk(geo.StripV(), cfg, seed, "jk-inequalities-strip-v")


# -- planar examples ---------------------------------------------------------------------


def check_arg_exactness(cfg, seed):
    f = harm.make_map("arg-map")
    H2, img = f.domain, f.image
    rows, wit = [], []
    for rho in (1e-2, 1e-3):
        X, Y = ver.arg_map_witness_pairs([rho])
        rG = float(geo.r_quantity_arrays(H2, X, Y)[0])
        rF = float(geo.r_quantity_arrays(img, f(X), f(Y))[0])
        expect = math.pi / (math.sqrt(2) * rho)
        e1, e2 = abs(rG - 2), abs(rF - expect) / expect
        rows.append(max(e1 / cfg.tol_exact_r, e2 / cfg.tol_exact_rf))
        if e1 > cfg.tol_exact_r or e2 > cfg.tol_exact_rf:
            wit.append(witness(X[0], Y[0], r_G=rG, r_fG=rF, expected=expect))
    return _report("arg-map-exactness", {"rho": [1e-2, 1e-3]}, 2, rows, wit,
                   {"normalised_error_max": max(rows)}, not wit)


def check_log_map(cfg, seed):
    f = harm.make_map("log-map")
    V, img = f.domain, f.image
    Z = geo.sample_interior(V, 20 * cfg.doubling_points, seed, cfg.R, cfg.delta)
    Z = Z[np.linalg.norm(Z, axis=1) >= 4][: cfg.doubling_points]
    rel = np.abs(img.dist(f(Z)) - 2 * V.dist(Z)) / (2 * V.dist(Z))
    wit = [witness(Z[i], None, kind="doubling", rel_err=rel[i]) for i in np.flatnonzero(rel > cfg.tol_doubling)[:5]]
    half = cfg.lipschitz_pairs // 2
    P = geo.sample_interior(V, 2 * half, seed + 1, cfg.R, cfg.delta)
    X2, Y2 = geo.sample_pairs_with_r_bound(V, 0.5, cfg.lipschitz_pairs - half, seed + 2, cfg.R, cfg.delta)
    X, Y = np.vstack([P[:half], X2]), np.vstack([P[half:], Y2])
    q = np.linalg.norm(f(X) - f(Y), axis=1) / np.linalg.norm(X - Y, axis=1)
    wit += [witness(X[i], Y[i], kind="lipschitz-4", ratio=q[i]) for i in np.flatnonzero(q > 4)[:5]]
    return _report("log-map-suite", {"doubling_points": len(Z), "pairs": len(X)}, len(Z) + len(X),
                   q, wit, {"doubling_rel_err_max": float(rel.max()), "lipschitz_ratio_max": float(q.max())},
                   not wit)


def check_log_nu(cfg, seed):
    """|nu(x + i/2)| >= 0.99 for x >= 100, checked on x in [100, 1e6].

    With nu = g'/h' = (1 - z)/(1 + z) this fails near x = 100, where
    |nu| = |z - 1|/|z + 1| is about 99/101; the crossing of 0.99 is reported.
    """
    f = harm.make_map("log-map")
    xs = np.logspace(2, 6, 41)
    nu = np.abs(f.second_dilatation(np.column_stack([xs, np.full_like(xs, 0.5)])))
    wit = [witness([xs[i], 0.5], None, nu_abs=nu[i]) for i in np.flatnonzero(nu < 0.99)[:5]]
    # |nu|^2 = ((x-1)^2 + 1/4) / ((x+1)^2 + 1/4); solve |nu| = 0.99 by bisection
    lo, hi = 1.0, 1e6
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if abs(f.second_dilatation(np.array([mid, 0.5]))) < 0.99:
            lo = mid
        else:
            hi = mid
    return _report("log-map-nu-threshold", {"x": [1e2, 1e6], "threshold": 0.99}, len(xs), nu, wit,
                   {"nu_abs_at_100": float(nu[0]), "crossing_x": hi}, not wit)


# -- Poisson extensions ------------------------------------------------------------------


def check_poisson_gradient(cfg, seed):
    wit, ratios, norm_err, grad_err = [], [], 0.0, 0.0
    status = PASS
    for n in (2, 3):
        Q, w = harm.sphere_quadrature(n, 1.0)
        exact = np.array([harm.kernel_gradient_at_center(n, 1.0, q) for q in Q])
        approx = harm._kernel_grad(n, 1.0, np.zeros((1, n)), Q)
        grad_err = max(grad_err, float(np.abs(approx - exact).max() / np.abs(exact).max()))
        for x in 0.9 * geo.unit_ball_qmc(n, 16, seed):
            Qx, wx = harm.sphere_quadrature(n, 1.0, harm._level_for(n, 1 - np.linalg.norm(x)))
            norm_err = max(norm_err, abs(float(harm.poisson_kernel(n, 1.0, x[None], Qx) @ wx) - 1))
        for i in range(cfg.poisson_count):
            f = harm.make_map("poisson", n=n, seed=seed + 1000 * n + i)
            rep = harm.gradient_bound_check(f, effort=1024, seed=seed, harmonicity_points=4,
                                            residual_tol=cfg.tol_residual)
            ratios.append(rep.sup)
            if rep.status != PASS:
                status = VIOLATION
                wit.extend(rep.witnesses)
    if norm_err > cfg.tol_kernel_norm or grad_err > cfg.tol_kernel_grad:
        status = VIOLATION
        wit.append(witness([0.0], None, kind="kernel", normalisation_err=norm_err, gradient_err=grad_err))
    return VerificationReport("poisson-gradient-bound", {"count_per_dim": cfg.poisson_count},
                              2 * cfg.poisson_count, float(max(ratios)), float(min(ratios)), wit,
                              {"kernel_normalisation_err": norm_err, "kernel_gradient_err": grad_err},
                              "no-violations" if status == PASS else "violations", status)


def check_schwarz(cfg, seed):
    sups, slack, wit, status = [], [], [], PASS
    for i in range(cfg.schwarz_count):
        f = harm.make_map("poisson", n=2, seed=seed + i)
        rep = harm.planar_schwarz_check(f)
        sups.append(rep.sup)
        slack.append(rep.inf)
        status = combine_status([status, rep.status])
        wit.extend(rep.witnesses[:2])
    return VerificationReport("planar-schwarz", {"maps": cfg.schwarz_count, "grid": [64, 256]},
                              cfg.schwarz_count * 64 * 256, float(max(sups)), float(min(slack)), wit[:10],
                              {"min_slack": float(min(slack))},
                              "no-violations" if status == PASS else "violations", status)


# -- shear golden values -------------------------------------------------------------------


def check_shear_golden(cfg, seed):
    f = harm.make_map("shear", c=0.5)
    K = dist.dilatation_estimate(f, count=1000, seed=seed).K
    X = geo.sample_interior(f.domain, 8, seed + 1)
    avg = [dist.conformal_averages(f, x, count=cfg.qmc_nodes, seed=seed) for x in X]
    target = math.sqrt(3) / 2
    af_err = max(abs(c.a_f - target) for c in avg)
    Af_err = max(abs(c.A_f - target) for c in avg)
    jb = dist.jac_derivative_bounds_check(f, count=256, seed=seed, qmc_count=4096)
    eq = ver.thqh1_equivalence_scan(f, points=X, qmc_count=4096, seed=seed)
    ratio_err = max(abs(eq.sup[k] - 1) for k in ("a_f", "A_f"))
    ratio_err = max(ratio_err, max(abs(eq.inf[k] - 1) for k in ("a_f", "A_f")))
    checks = {
        "K": abs(K - 3) <= cfg.tol_golden,
        "a_f": af_err <= cfg.tol_mc,
        "A_f": Af_err <= cfg.tol_mc,
        "left_gap": jb.residuals["left_gap_max"] <= cfg.tol_golden and jb.status == PASS,
        "equivalence_ratios": ratio_err <= cfg.tol_mc,
    }
    ok = all(checks.values())
    return VerificationReport("shear-golden-values", {"c": 0.5}, 1000 + len(X),
                              K, float(min(c.a_f for c in avg)), [] if ok else [{"failed": [k for k, v in checks.items() if not v]}],
                              {"K": K, "a_f_err": af_err, "A_f_err": Af_err,
                               "left_gap_max": jb.residuals["left_gap_max"], "equivalence_ratio_err": ratio_err,
                               "distance_ratio_band": [eq.inf["distance"], eq.sup["distance"]]},
                              "golden-values-match" if ok else "mismatch", PASS if ok else VIOLATION)


# -- counterexamples ----------------------------------------------------------------------


def check_exp_divergence(cfg, seed):
    return ver.exp_map_divergence()


def check_arg_wub(cfg, seed):
    f = harm.make_map("arg-map")
    scales = [1e-1, 1e-2, 1e-3]
    X, Y = ver.arg_map_witness_pairs(scales)
    w = ver.wub_check(f, count=cfg.wub_pairs, seed=seed, threshold=2.0, scales=scales, extra_pairs=(X, Y))
    strict = ver.wub_check(f, count=cfg.wub_pairs, seed=seed + 1, threshold=0.5, scales=scales)
    need = {s["scale"]: 0.9 * math.pi / (math.sqrt(2) * s["scale"]) for s in w.per_scale}
    meets = all(s["sup"] >= need[s["scale"]] for s in w.per_scale) and len(w.per_scale) == 3
    ok = w.verdict == ver.DIVERGENT and meets
    rep = w.to_report("arg-map-wub-divergence", {"scales": scales}, PASS if ok else VIOLATION)
    rep.residuals["required"] = [need[s["scale"]] for s in w.per_scale]
    rep.residuals["threshold_half"] = {"per_scale": strict.per_scale, "verdict": strict.verdict}
    return rep


def check_reim_wub(cfg, seed):
    f = harm.make_map("reim-map")
    w = ver.wub_check(f, count=cfg.wub_pairs, seed=seed, scales=[1e-1, 1e-2, 1e-3])
    # exploratory: no threshold is prescribed for this example
    return w.to_report("reim-map-wub-exploratory", {"scales": [1e-1, 1e-2, 1e-3]}, PASS)


# -- H^3 and Lipschitz coherence ----------------------------------------------------------


def check_h3(cfg, seed):
    return ver.halfspace_harmonic_qi_check((0.1, 0.1), cfg.h3_samples, seed, cfg.tol_residual)


def check_coherence_shear(cfg, seed):
    return ver.lipschitz_wub_coherence(harm.make_map("shear", c=0.5), seed=seed, wub_count=cfg.wub_pairs)


def check_coherence_log(cfg, seed):
    return ver.lipschitz_wub_coherence(harm.make_map("log-map"), seed=seed, wub_count=cfg.wub_pairs)


def check_astala_gehring(cfg, seed):
    return dist.astala_gehring_check(harm.make_map("shear", c=0.5), count=32, seed=seed)


def check_shear_bilipschitz(cfg, seed):
    """Bi-Lipschitz conclusion on the compactly contained disk Ball(0, 0.9)."""
    f = harm.make_map("shear", c=0.5, radius=0.9)
    fwd, inv = ver.bilipschitz_estimate(f, point_count=500, pair_count=cfg.solver_pairs, seed=seed)
    ok = all(math.isfinite(v) and v > 0 for v in (fwd.point_sup, fwd.pair_sup, inv.point_sup, inv.pair_sup))
    return VerificationReport("shear-bilipschitz", {"radius": 0.9, "pairs": cfg.solver_pairs},
                              fwd.n_points + fwd.n_pairs, max(fwd.point_sup, inv.point_sup),
                              min(fwd.pair_inf, inv.pair_inf), fwd.witnesses,
                              {"forward": fwd.to_report("f").residuals, "inverse": inv.to_report("i").residuals},
                              "bounded-evidence" if ok else "unbounded", PASS if ok else VIOLATION)


def check_log_inverse_degeneration(cfg, seed):
    f = harm.make_map("log-map")
    xs = np.logspace(0.5, 6, 12)
    Lam, lam, _ = dist.planar_quantities(f, np.column_stack([xs, np.full_like(xs, 0.5)]))
    q = lam / Lam
    ok = bool(np.all(np.diff(q) < 0) and q[-1] < 1e-4)
    return VerificationReport("log-map-inverse-degeneration", {"x": xs.tolist()}, len(xs),
                              float(q.max()), float(q.min()), [], {"lambda_over_Lambda": q.tolist()},
                              "degenerates" if ok else "no-degeneration", PASS if ok else VIOLATION)


CHECKS = {
    "halfspace-geodesic-oracle": (check_halfspace_geodesics, ("tol_geodesic",)),
    "ball-radial-oracle": (check_ball_radial, ("tol_geodesic",)),
    "jk-inequalities-ball": (check_jk_ball, ("tol_margin",)),
    "jk-inequalities-strip-v": (check_jk_strip, ("tol_margin",)),
    "arg-map-exactness": (check_arg_exactness, ("tol_exact_r", "tol_exact_rf")),
    "log-map-suite": (check_log_map, ("tol_doubling",)),
    "log-map-nu-threshold": (check_log_nu, ()),
    "poisson-gradient-bound": (check_poisson_gradient, ("tol_kernel_norm", "tol_kernel_grad", "tol_residual")),
    "planar-schwarz": (check_schwarz, ()),
    "shear-golden-values": (check_shear_golden, ("tol_golden", "tol_mc")),
    "exp-map-divergence": (check_exp_divergence, ()),
    "arg-map-wub-divergence": (check_arg_wub, ()),
    "reim-map-wub-exploratory": (check_reim_wub, ()),
    "h3-example": (check_h3, ("tol_residual",)),
    "lipschitz-wub-coherence-shear": (check_coherence_shear, ()),
    "lipschitz-wub-coherence-log-map": (check_coherence_log, ()),
    "astala-gehring-shear": (check_astala_gehring, ()),
    "shear-bilipschitz": (check_shear_bilipschitz, ()),
    "log-map-inverse-degeneration": (check_log_inverse_degeneration, ()),
}

# acceptance criterion number -> checks that decide it
CRITERIA = {
    1: ["halfspace-geodesic-oracle"],
    2: ["ball-radial-oracle"],
    3: ["jk-inequalities-ball", "jk-inequalities-strip-v"],
    4: ["arg-map-exactness"],
    5: ["log-map-suite", "log-map-nu-threshold"],
    6: ["poisson-gradient-bound"],
    7: ["planar-schwarz"],
    8: ["shear-golden-values"],
    9: ["exp-map-divergence", "arg-map-wub-divergence"],
    10: ["h3-example"],
    11: ["lipschitz-wub-coherence-shear", "lipschitz-wub-coherence-log-map"],
}


def run_check(name: str, cfg: RunConfig) -> dict:
    fn, tols = CHECKS[name]
    seed = ver.check_seed(cfg.seed, name)
    broken = [t for t in tols if not getattr(cfg, t) > 0]
    if broken:
        return VerificationReport(name, {"invalid": broken}, 0, math.nan, math.nan, [], {},
                                  "invalid tolerance", NUMERICAL_FAILURE).to_record()
    try:
        with np.errstate(all="ignore"):
            rep = fn(cfg, seed)
    except Exception as exc:  # a failing check is recorded, never aborts the suite
        return VerificationReport(name, {}, 0, math.nan, math.nan, [], {"error": f"{type(exc).__name__}: {exc}"},
                                  "error", NUMERICAL_FAILURE).to_record()
    rec = rep.to_record()
    rec["check_name"] = name
    return rec


def run_paper_suite(cfg: RunConfig | None = None, only=None) -> dict:
    """Run every check (or the ``only`` subset); deterministic for a fixed seed."""
    cfg = cfg or RunConfig()
    names = [n for n in CHECKS if only is None or n in only]
    if cfg.workers > 1:
        with ProcessPoolExecutor(cfg.workers) as pool:
            recs = list(pool.map(run_check, names, [cfg] * len(names)))
    else:
        recs = [run_check(n, cfg) for n in names]
    checks = {r["check_name"]: r for r in recs}
    status = combine_status(r["status"] for r in recs)
    criteria = {str(k): combine_status(checks[n]["status"] for n in v if n in checks)
                for k, v in CRITERIA.items() if all(n in checks for n in v)}
    return {"version": __version__, "seed": cfg.seed, "checks": checks, "criteria": criteria,
            "status": status, "n_checks": len(checks)}


def exit_code(status: str) -> int:
    return {PASS: 0, VIOLATION: 1, NUMERICAL_FAILURE: 2}[status]

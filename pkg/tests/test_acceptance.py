"""Acceptance criteria 1-12, each checked at its stated tolerance.

The ``qhyp suite paper`` command is run twice through the command line with seed 42; every
criterion below reads the first report.  One line per criterion is printed
(and collected into the terminal summary by conftest).
"""
import json
import math
import subprocess
import sys
import time

import pytest

from conftest import ACCEPTANCE_LINES
from qhyp import suite
from qhyp.config import RunConfig
from qhyp.verify import check_seed

SEED = 42


def record(number, ok, detail):
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'} {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


@pytest.fixture(scope="module")
def runs(tmp_path_factory):
    out = []
    for i in range(2):
        path = tmp_path_factory.mktemp(f"run{i}") / "report.json"
        t0 = time.perf_counter()
        proc = subprocess.run([sys.executable, "-m", "qhyp.cli", "suite", "paper", "--seed", str(SEED),
                               "--out", str(path)], capture_output=True, text=True)
        out.append({"seconds": time.perf_counter() - t0, "code": proc.returncode,
                    "stderr": proc.stderr, "bytes": path.read_bytes()})
    return out


@pytest.fixture(scope="module")
def report(runs):
    return json.loads(runs[0]["bytes"])


def checks(report, *names):
    return [report["checks"][n] for n in names]


def test_suite_shape(report, runs):
    assert report["n_checks"] >= 12
    assert report["seed"] == SEED
    # the only non-passing check is the criterion-5 threshold recorded below
    failing = sorted(n for n, c in report["checks"].items() if c["status"] != "pass")
    assert failing == ["log-map-nu-threshold"]
    assert runs[0]["code"] == 1


def test_criterion_1_halfspace_geodesic(report):
    (c,) = checks(report, "halfspace-geodesic-oracle")
    # runtime is measured on a direct run (timings never enter the report)
    cfg = RunConfig(seed=SEED)
    t0 = time.perf_counter()
    again = suite.CHECKS["halfspace-geodesic-oracle"][0](cfg, check_seed(SEED, "halfspace-geodesic-oracle"))
    seconds = time.perf_counter() - t0
    err = c["residuals"]["max_rel_err"]
    ok = c["status"] == "pass" and err <= 0.01 and c["params"]["pairs"] == [50, 20] and seconds <= 60
    record(1, ok, f"max relative error {err:.3g} (<= 1e-2) over 50+20 pairs in {seconds:.1f} s (<= 60 s)")
    assert ok and again.status == "pass"


def test_criterion_2_ball_radial(report):
    (c,) = checks(report, "ball-radial-oracle")
    err = c["residuals"]["max_rel_err"]
    ok = c["status"] == "pass" and err <= 0.01 and c["params"]["t"] == [0.25, 0.5, 0.9]
    record(2, ok, f"max relative error {err:.3g} (<= 1e-2) at t = 0.25, 0.5, 0.9")
    assert ok


def test_criterion_3_jk_inequalities(report):
    cs = checks(report, "jk-inequalities-ball", "jk-inequalities-strip-v")
    viol = sum(c["residuals"]["violations_a"] + c["residuals"]["violations_b"] for c in cs)
    pairs = [c["params"]["pairs"] for c in cs]
    ok = all(c["status"] == "pass" for c in cs) and viol == 0 and pairs == [10_000, 10_000]
    record(3, ok, f"{viol} violations over {pairs} pairs in Ball(0,1) and StripV")
    assert ok


def test_criterion_4_arg_map_exactness(report):
    (c,) = checks(report, "arg-map-exactness")
    ok = c["status"] == "pass" and c["params"]["rho"] == [0.01, 0.001]
    record(4, ok, f"r_H2 = 2 to 1e-12 and r_fH2 = pi/(sqrt2 rho) to 1e-6; worst normalised error "
                  f"{c['residuals']['normalised_error_max']:.3g} (<= 1)")
    assert ok


def test_criterion_5_log_map(report):
    suite_c, nu_c = checks(report, "log-map-suite", "log-map-nu-threshold")
    err = suite_c["residuals"]["doubling_rel_err_max"]
    lip = suite_c["residuals"]["lipschitz_ratio_max"]
    ok_main = suite_c["status"] == "pass" and err <= 1e-9 and lip <= 4
    nu100 = nu_c["residuals"]["nu_abs_at_100"]
    ok_nu = nu_c["status"] == "pass"
    record(5, ok_main and ok_nu,
           f"d(f(z)) = 2 d(z) to {err:.3g} (<= 1e-9), |f(z1)-f(z)|/|z1-z| <= {lip:.4g} (<= 4); "
           f"|nu(100+0.5i)| = {nu100:.6f} < 0.99 (threshold false below x = "
           f"{nu_c['residuals']['crossing_x']:.3f}, see ledger)")
    assert ok_main


@pytest.mark.xfail(strict=True, reason="|nu(x+0.5i)| >= 0.99 only holds for x >= 199; it is 0.98020 at x = 100")
def test_criterion_5_nu_threshold(report):
    (c,) = checks(report, "log-map-nu-threshold")
    assert c["status"] == "pass"


def test_nu_threshold_is_false_analytically():
    # |nu(z)| = |(1 - z)/(1 + z)| for nu = g'/h' = (-1 + 1/z)/(1 + 1/z)
    z = 100 + 0.5j
    assert abs((1 - z) / (1 + z)) == pytest.approx(0.980198, abs=1e-6)


def test_criterion_6_poisson_gradient(report):
    (c,) = checks(report, "poisson-gradient-bound")
    r = c["residuals"]
    ok = (c["status"] == "pass" and c["params"]["count_per_dim"] == 100
          and r["kernel_normalisation_err"] <= 1e-6 and r["kernel_gradient_err"] <= 1e-8 and c["sup"] <= 1)
    record(6, ok, f"0 violations of r|h'(0)| <= n M0* over 100+100 extensions (max ratio {c['sup']:.3g}); "
                  f"kernel normalisation error {r['kernel_normalisation_err']:.2g} (<= 1e-6), "
                  f"centre gradient error {r['kernel_gradient_err']:.2g} (<= 1e-8)")
    assert ok


def test_criterion_7_planar_schwarz(report):
    (c,) = checks(report, "planar-schwarz")
    ok = c["status"] == "pass" and c["params"] == {"grid": [64, 256], "maps": 100} and c["inf"] >= 0
    record(7, ok, f"0 violations on a 64x256 grid for 100 extensions; min slack {c['inf']:.3g}")
    assert ok


def test_criterion_8_shear_golden_values(report):
    (c,) = checks(report, "shear-golden-values")
    r = c["residuals"]
    ok = (c["status"] == "pass" and abs(r["K"] - 3) <= 1e-6 and r["a_f_err"] <= 1e-3 and r["A_f_err"] <= 1e-3
          and r["left_gap_max"] <= 1e-6 and r["equivalence_ratio_err"] <= 1e-3)
    record(8, ok, f"K = {r['K']:.12g} (3 +- 1e-6), a_f/A_f errors {r['a_f_err']:.2g}/{r['A_f_err']:.2g} "
                  f"(<= 1e-3), left gap {r['left_gap_max']:.2g} (<= 1e-6), ratio error "
                  f"{r['equivalence_ratio_err']:.2g} (<= 1e-3)")
    assert ok


def test_criterion_9_divergence(report):
    exp_c, arg_c = checks(report, "exp-map-divergence", "arg-map-wub-divergence")
    ratios = [w["values"]["ratio"] for w in exp_c["witnesses"]]
    sups = [s["sup"] for s in arg_c["residuals"]["per_scale"]]
    scales = [s["scale"] for s in arg_c["residuals"]["per_scale"]]
    need = [0.9 * math.pi / (math.sqrt(2) * rho) for rho in scales]
    ok = (exp_c["verdict"] == "divergence-evidence" and max(ratios) > 100 and len(ratios) == 3
          and arg_c["verdict"] == "divergence-evidence" and scales == [0.1, 0.01, 0.001]
          and all(s >= n for s, n in zip(sups, need)))
    record(9, ok, f"exp-map k-ratios {[round(x, 1) for x in ratios]} (max > 100, divergent); "
                  f"arg-map per-scale sups {[round(x, 1) for x in sups]} >= {[round(x, 1) for x in need]}")
    assert ok


def test_criterion_10_h3_example(report):
    (c,) = checks(report, "h3-example")
    r = c["residuals"]
    ok = (c["status"] == "pass" and r["third_component_exact"] and r["harmonicity_max"] <= 1e-6
          and c["inf"] > 0 and math.isfinite(c["sup"]) and math.isfinite(r["density_c"])
          and c["params"]["count"] == 1000)
    record(10, ok, f"h3 = x3 exactly, harmonicity residual {r['harmonicity_max']:.2g} (<= 1e-6), "
                   f"inf l(h') = {c['inf']:.4g}, sup |h'| = {c['sup']:.4g}, density c = {r['density_c']:.4g}")
    assert ok


def test_criterion_11_coherence(report):
    cs = checks(report, "lipschitz-wub-coherence-shear", "lipschitz-wub-coherence-log-map")
    ok = all(c["status"] == "pass" and c["residuals"]["wub_sup"] <= c["residuals"]["bound"] for c in cs)
    detail = "; ".join(f"{c['params']['map']}: WUB sup {c['residuals']['wub_sup']:.3g} <= "
                       f"e^c2 - 1 = {c['residuals']['bound']:.3g}" for c in cs)
    record(11, ok, detail)
    assert ok


def test_criterion_12_determinism(runs):
    same = runs[0]["bytes"] == runs[1]["bytes"]
    slowest = max(r["seconds"] for r in runs)
    ok = same and slowest <= 600
    record(12, ok, f"byte-identical reports: {same}; slowest run {slowest:.0f} s (<= 600 s, 1 core)")
    assert ok


def test_criteria_summary_matches_report(report):
    assert report["criteria"] == {str(k): ("violation" if k == 5 else "pass") for k in range(1, 12)}

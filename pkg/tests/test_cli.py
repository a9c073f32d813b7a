import json
import math

import pytest

from qhyp import cli
from qhyp.config import ConfigError, RunConfig


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


# -- parse_args ------------------------------------------------------------------------------


def test_dist_example_parses():
    args, cfg = cli.parse_args(["dist", "--domain", "ball 0 0 1", "--kind", "j",
                                "--from", "0", "0", "--to", "0.5", "0"])
    assert args.command == "dist" and args.kind == "j"
    assert cfg.domain == "ball 0 0 1"


def test_suite_seed_parses():
    args, cfg = cli.parse_args(["suite", "paper", "--seed", "42"])
    assert args.command == "suite" and cfg.seed == 42


def test_env_seed_is_default(monkeypatch):
    monkeypatch.setenv("QHYP_SEED", "17")
    assert cli.parse_args(["suite", "paper"])[1].seed == 17
    assert cli.parse_args(["suite", "paper", "--seed", "3"])[1].seed == 3


def test_config_file_sits_under_flags(tmp_path):
    p = tmp_path / "run.cfg"
    p.write_text("# comment\nseed = 5\ntol_geodesic = 0.5\n")
    _, cfg = cli.parse_args(["suite", "paper", "--config", str(p)])
    assert cfg.seed == 5 and cfg.tol_geodesic == 0.5
    _, cfg = cli.parse_args(["suite", "paper", "--config", str(p), "--seed", "9"])
    assert cfg.seed == 9


def test_numeric_flag_defaults_match_module_defaults():
    from qhyp.metrics import SolverOptions

    args, _ = cli.parse_args(["geodesic", "--domain", "halfspace 2", "--from", "0", "1", "--to", "1", "1"])
    assert args.tol == SolverOptions().tol and args.max_iters == SolverOptions().max_iters


@pytest.mark.parametrize("argv", [
    ["dist", "--kind", "bogus"],
    ["dist", "--domain", "ball 0 0 1", "--kind", "bogus", "--from", "0", "0", "--to", "0.5", "0"],
    ["frobnicate"],
    [],
    ["map"],
    ["suite", "paper", "--unknown-flag"],
    ["dist", "--domain", "ball 0 0 1", "--kind", "j", "--from", "0", "0", "0", "--to", "0.5", "0"],
    ["dist", "--domain", "cube 1", "--kind", "j", "--from", "0", "0", "--to", "0.5", "0"],
    ["map", "eval", "--map", "nope", "--at", "1", "1"],
])
def test_usage_errors_exit_3(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 3
    assert err


def test_version(capsys):
    code, out, _ = run(capsys, "--version")
    assert code == 0 and out.startswith("qhyp ")


# -- commands ---------------------------------------------------------------------------------


def test_dist_j_value(capsys):
    code, out, _ = run(capsys, "dist", "--domain", "ball 0 0 1", "--kind", "j",
                       "--from", "0", "0", "--to", "0.5", "0")
    assert code == 0
    assert json.loads(out)["value"] == pytest.approx(math.log(2), rel=1e-15)


def test_dist_k_in_halfspace(capsys):
    code, out, _ = run(capsys, "dist", "--domain", "halfspace 2", "--kind", "k",
                       "--from", "0", "1", "--to", "0", "4")
    rec = json.loads(out)
    assert code == 0 and rec["value"] == pytest.approx(math.log(4), rel=1e-4)


def test_geodesic_has_path(capsys):
    code, out, _ = run(capsys, "geodesic", "--domain", "ball 0 0 1", "--from", "0", "0", "--to", "0.5", "0")
    rec = json.loads(out)
    assert code == 0 and rec["path"][0] == [0.0, 0.0] and rec["path"][-1] == [0.5, 0.0]


def test_map_list_and_eval(capsys):
    code, out, _ = run(capsys, "map", "list")
    names = {r["name"] for r in json.loads(out)}
    assert code == 0 and {"arg-map", "log-map", "shear", "h3-map"} <= names
    code, out, _ = run(capsys, "map", "eval", "--map", "shear", "--params", "c=0.5", "--at", "0.2", "0.1")
    rec = json.loads(out)
    assert rec["value"] == pytest.approx([0.3, 0.05])
    assert rec["jacobian"] == [[1.5, 0.0], [0.0, 0.5]]


def test_distortion_csv_header(capsys):
    code, out, _ = run(capsys, "scan", "distortion", "--map", "shear", "--samples", "3", "--qmc", "64")
    lines = out.splitlines()
    assert code == 0
    assert lines[0] == "x0,x1,opnorm,minstretch,J,Lambda,lambda,nu_abs,a_f,E_f,A_f"
    assert len(lines) == 4


@pytest.mark.parametrize("what,cols", [("wub", 7), ("lipschitz", 4), ("equivalence", 5)])
def test_other_scans(capsys, what, cols):
    code, out, _ = run(capsys, "scan", what, "--map", "shear", "--samples", "4", "--qmc", "64", "--seed", "2")
    lines = out.splitlines()
    assert code == 0
    assert all(len(line.split(",")) == cols for line in lines)


def test_scan_output_file_and_determinism(capsys, tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for p in (a, b):
        assert cli.main(["scan", "wub", "--map", "log-map", "--samples", "20", "--seed", "4", "--out", str(p)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_arg_map_distortion_scan_is_numerical_failure(capsys):
    code, _, err = run(capsys, "scan", "distortion", "--map", "arg-map", "--samples", "5", "--qmc", "64")
    assert code == 2 and "numerical failure" in err


def test_suite_with_zero_tolerance_exits_2(capsys, tmp_path):
    p = tmp_path / "broken.cfg"
    p.write_text("tol_exact_r = 0\n")
    code, out, _ = run(capsys, "suite", "paper", "--config", str(p), "--only", "arg-map-exactness")
    rep = json.loads(out)
    assert code == 2
    assert rep["checks"]["arg-map-exactness"]["status"] == "numerical-failure"


def test_suite_subset_passes(capsys):
    code, out, _ = run(capsys, "suite", "paper", "--seed", "1", "--only", "ball-radial-oracle", "arg-map-exactness")
    rep = json.loads(out)
    assert code == 0 and rep["status"] == "pass"
    assert set(rep["checks"]) == {"ball-radial-oracle", "arg-map-exactness"}


# -- serialisation -----------------------------------------------------------------------------


def test_dumps_is_key_sorted_with_17_digits():
    text = cli.dumps({"b": 0.1, "a": [1, 2.0], "w": [], "n": None, "t": True})
    assert text == '{"a": [1, 2.0], "b": 0.10000000000000001, "n": null, "t": true, "w": []}'
    assert cli.dumps({"x": float("inf")}) == '{"x": Infinity}'


def test_emit_report_identical_bytes(tmp_path):
    rep = {"check_name": "x", "sup": 1 / 3, "witnesses": []}
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    cli.emit_report(rep, "json", str(a))
    cli.emit_report(rep, "json", str(b))
    assert a.read_bytes() == b.read_bytes()
    assert json.loads(a.read_text())["witnesses"] == []


def test_emit_report_io_error_names_path(tmp_path):
    bad = tmp_path / "missing" / "x.json"
    with pytest.raises(OSError, match="missing"):
        cli.emit_report({}, "json", str(bad))


# -- RunConfig -----------------------------------------------------------------------------------


def test_config_round_trip():
    cfg = RunConfig(seed=3, tol_geodesic=0.02, map="shear", domain="ball 0 0 0.9")
    assert RunConfig.from_text(cfg.to_text()) == cfg


def test_config_validation():
    assert RunConfig().problems() == []
    assert "tol_mc" in RunConfig(tol_mc=0.0).problems()
    assert "jk_pairs" in RunConfig(jk_pairs=0).problems()
    with pytest.raises(ConfigError):
        RunConfig.from_text("nonsense = 1\n")
    with pytest.raises(ConfigError):
        RunConfig.from_text("seed = abc\n")
    with pytest.raises(ConfigError):
        RunConfig.from_text("just words\n")

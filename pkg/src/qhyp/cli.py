"""Command-line front end: ``qhyp dist|geodesic|map|scan|suite``.

Exit codes: 0 success / all checks pass, 1 a violation, 2 a numerical
failure, 3 a usage error.
"""
from __future__ import annotations

import argparse
import io
import json
import math
import sys

import numpy as np

from . import __version__
from . import distortion as dist
from . import geometry as geo
from . import harmonic as harm
from . import metrics as met
from . import suite
from . import verify as ver
from .config import ConfigError, RunConfig, default_seed
from .reports import plain

EXIT_USAGE = 3

KIND_ALIASES = {
    "euclidean": met.MetricKind.EUCLIDEAN,
    "j": met.MetricKind.J,
    "k": met.MetricKind.K,
    "hyp-ball": met.MetricKind.HYP_BALL,
    "hyp-halfspace": met.MetricKind.HYP_HALFSPACE,
}
KIND_ALIASES.update({k.value: k for k in met.MetricKind})

CSV_HEADERS = {
    "distortion": ["opnorm", "minstretch", "J", "Lambda", "lambda", "nu_abs", "a_f", "E_f", "A_f"],
    "wub": ["r_G", "r_fG", "d_x"],
    "lipschitz": ["upper_ratio", "lower_ratio"],
    "equivalence": ["ratio_distance", "ratio_a_f", "ratio_A_f"],
}


class UsageError(Exception):
    pass


# -- serialisation -------------------------------------------------------------------


def _num(v: float) -> str:
    if math.isnan(v):
        return "NaN"
    if math.isinf(v):
        return "Infinity" if v > 0 else "-Infinity"
    text = format(v, ".17g")
    # keep floats recognisable as floats
    return text if any(c in text for c in ".en") else text + ".0"


def dumps(obj) -> str:
    """Key-sorted JSON with floats written to 17 significant digits."""
    obj = plain(obj)
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return _num(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        items = sorted(obj.items())
        return "{" + ", ".join(f"{json.dumps(str(k))}: {dumps(v)}" for k, v in items) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(dumps(v) for v in obj) + "]"
    return json.dumps(str(obj))


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(_num(float(v)) for v in row) + "\n")
    return buf.getvalue()


def emit(text: str, path: str | None):
    if not path:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
        return
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text if text.endswith("\n") else text + "\n")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror}") from exc


def emit_report(report, fmt: str = "json", path: str | None = None, header=None):
    if fmt == "json":
        emit(dumps(report), path)
    elif fmt == "csv":
        emit(csv_text(header, report), path)
    else:
        raise ValueError(f"unknown format {fmt!r}")


# -- argument parsing -----------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _common(p):
    p.add_argument("--config", help="flat key = value file; explicit flags override it")
    p.add_argument("--seed", type=int, default=None, help="top-level seed (default: QHYP_SEED or 0)")
    p.add_argument("--out", default=None, help="output path (default: stdout)")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="qhyp", description="quasihyperbolic metrics and harmonic quasiconformal maps")
    p.add_argument("--version", action="version", version=f"qhyp {__version__}")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    d = sub.add_parser("dist", help="distance between two points")
    _common(d)
    d.add_argument("--domain", required=True)
    d.add_argument("--kind", required=True, choices=sorted(KIND_ALIASES))
    d.add_argument("--from", dest="x", nargs="+", type=float, required=True)
    d.add_argument("--to", dest="y", nargs="+", type=float, required=True)
    d.add_argument("--tol", type=float, default=met.SolverOptions.tol)
    d.add_argument("--max-iters", type=int, default=met.SolverOptions.max_iters)

    g = sub.add_parser("geodesic", help="approximate geodesic polyline")
    _common(g)
    g.add_argument("--domain", required=True)
    g.add_argument("--kind", default="k", choices=sorted(KIND_ALIASES))
    g.add_argument("--from", dest="x", nargs="+", type=float, required=True)
    g.add_argument("--to", dest="y", nargs="+", type=float, required=True)
    g.add_argument("--tol", type=float, default=met.SolverOptions.tol)
    g.add_argument("--max-iters", type=int, default=met.SolverOptions.max_iters)

    m = sub.add_parser("map", help="registry maps")
    msub = m.add_subparsers(dest="action", parser_class=_Parser)
    ml = msub.add_parser("list")
    ml.add_argument("--out", default=None)
    me = msub.add_parser("eval")
    _common(me)
    me.add_argument("--map", required=True)
    me.add_argument("--params", nargs="*", default=[], help="key=value map parameters")
    me.add_argument("--at", nargs="+", type=float, required=True)

    s = sub.add_parser("scan", help="sampled scans emitting CSV")
    s.add_argument("what", choices=sorted(CSV_HEADERS))
    _common(s)
    s.add_argument("--map", required=True)
    s.add_argument("--params", nargs="*", default=[])
    s.add_argument("--domain", default=None, help="defaults to the map's source domain")
    s.add_argument("--samples", type=int, default=100)
    s.add_argument("--qmc", type=int, default=None, help="quadrature nodes for a_f/E_f (default 2^16)")

    su = sub.add_parser("suite", help="verification suites")
    su.add_argument("which", choices=["paper"])
    _common(su)
    su.add_argument("--workers", type=int, default=None)
    su.add_argument("--only", nargs="*", default=None, choices=sorted(suite.CHECKS))
    return p


def parse_params(items) -> dict:
    out = {}
    for it in items:
        if "=" not in it:
            raise UsageError(f"map parameter {it!r} is not key=value")
        k, v = it.split("=", 1)
        try:
            out[k] = int(v)
        except ValueError:
            try:
                out[k] = float(v)
            except ValueError:
                out[k] = v
    return out


def parse_args(argv):
    """(namespace, RunConfig) with config-file values under explicit flags."""
    args = build_parser().parse_args(argv)
    if args.command is None:
        raise UsageError("a subcommand is required")
    if args.command == "map" and args.action is None:
        raise UsageError("map needs an action (list or eval)")
    cfg = RunConfig(seed=default_seed())
    path = getattr(args, "config", None)
    if path:
        try:
            with open(path, encoding="utf-8") as fh:
                cfg = RunConfig.from_text(fh.read(), cfg)
        except OSError as exc:
            raise UsageError(f"cannot read config {path}: {exc.strerror}") from exc
    cfg = cfg.update(seed=getattr(args, "seed", None), out=getattr(args, "out", None),
                     workers=getattr(args, "workers", None), map=getattr(args, "map", None),
                     domain=getattr(args, "domain", None))
    return args, cfg


# -- commands ---------------------------------------------------------------------------


def _points(domain, *pts):
    for p in pts:
        if len(p) != domain.dim:
            raise UsageError(f"point {p} has dimension {len(p)}, domain has {domain.dim}")
    return [np.array(p, float) for p in pts]


def _distance(args, cfg, with_path):
    domain = geo.parse_domain(args.domain)
    x, y = _points(domain, args.x, args.y)
    kind = KIND_ALIASES[args.kind]
    rec = {"domain": domain.spec, "kind": kind.value, "from": x, "to": y}
    if kind == met.MetricKind.EUCLIDEAN and not with_path:
        domain.dist(np.vstack([x, y]))
        rec["value"] = float(np.linalg.norm(x - y))
    elif kind == met.MetricKind.J and not with_path:
        rec["value"] = met.j_dist(domain, x, y)
    elif kind == met.MetricKind.HYP_BALL and not with_path:
        domain.dist(np.vstack([x, y]))
        if not (isinstance(domain, geo.Ball) and domain.radius == 1 and not any(domain.center)):
            raise UsageError("hyp-ball distance needs the unit ball")
        rec["value"] = met.hyp_dist_ball(x, y)
    elif kind == met.MetricKind.HYP_HALFSPACE and not with_path:
        domain.dist(np.vstack([x, y]))
        if not isinstance(domain, geo.HalfSpace):
            raise UsageError("hyp-halfspace distance needs a half-space")
        rec["value"] = met.hyp_dist_halfspace(x, y)
    else:
        if kind == met.MetricKind.J:
            raise UsageError("j is not a path metric; use dist")
        opts = met.SolverOptions(tol=args.tol, max_iters=args.max_iters, seed=cfg.seed, R=cfg.R, delta=cfg.delta)
        res = met.quasihyp_dist(domain, x, y, opts, kind)
        rec.update(res.to_record(with_path=with_path))
    emit(dumps(rec), cfg.out)
    return 0


def cmd_map(args, cfg):
    if args.action == "list":
        rows = [{"name": e.name, "description": e.citation} for e in harm.registry()]
        emit(dumps(rows), args.out)
        return 0
    f = _make(args.map, args.params)
    x = np.array(args.at, float)
    if len(x) != f.dim:
        raise UsageError(f"--at needs {f.dim} coordinates")
    f.domain.dist(x)
    rec = {"map": f.name, "params": f.params, "at": x, "value": f(x), "jacobian": f.jacobian(x)}
    emit(dumps(rec), cfg.out)
    return 0


def _make(name, params):
    try:
        return harm.make_map(name, **parse_params(params))
    except KeyError as exc:
        raise UsageError(str(exc)) from exc
    except TypeError as exc:
        raise UsageError(f"bad parameters for {name}: {exc}") from exc


def cmd_scan(args, cfg):
    f = _make(args.map, args.params)
    domain = geo.parse_domain(args.domain) if args.domain else f.domain
    if args.samples < 1:
        raise UsageError("--samples must be >= 1")
    seed = cfg.seed
    n = domain.dim
    X = geo.sample_interior(domain, args.samples, seed, cfg.R, cfg.delta)
    xcols = [f"x{i}" for i in range(n)]
    if args.what == "distortion":
        _, op, mn, J = dist.derivative_arrays(f, X)
        if isinstance(f, harm.PlanarHarmonicMap):
            Lam, lam, nu = dist.planar_quantities(f, X)
            nu = np.abs(nu)
        else:
            Lam = lam = nu = np.full(len(X), np.nan)
        qmc = args.qmc or cfg.qmc_nodes
        avg = [dist.conformal_averages(f, x, domain, qmc, seed) for x in X]
        rows = np.column_stack([X, op, mn, J, Lam, lam, nu, [c.a_f for c in avg],
                                [c.E_f for c in avg], [c.A_f for c in avg]])
        header = xcols + CSV_HEADERS["distortion"]
    elif args.what == "wub":
        img = ver.image_domain_for(f)
        PX, PY = geo.sample_pairs_with_r_bound(domain, 0.5, args.samples, seed, cfg.R, cfg.delta)
        rows = np.column_stack([PX, PY, geo.r_quantity_arrays(domain, PX, PY),
                                geo.r_quantity_arrays(img, f(PX), f(PY)), domain.dist(PX)])
        header = xcols + [f"y{i}" for i in range(n)] + CSV_HEADERS["wub"]
    elif args.what == "lipschitz":
        up, low = ver.pointwise_ratios(f, domain, ver.image_domain_for(f), X)
        rows = np.column_stack([X, up, low])
        header = xcols + CSV_HEADERS["lipschitz"]
    else:
        eq = ver.thqh1_equivalence_scan(f, domain, points=X, qmc_count=args.qmc or cfg.qmc_nodes, seed=seed)
        rows = np.column_stack([X] + [eq.ratios[k] for k in ("distance", "a_f", "A_f")])
        header = xcols + CSV_HEADERS["equivalence"]
    emit(csv_text(header, rows), cfg.out)
    return 0


def cmd_suite(args, cfg):
    report = suite.run_paper_suite(cfg, only=args.only)
    emit(dumps(report), cfg.out)
    return suite.exit_code(report["status"])


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args, cfg = parse_args(argv)
        if args.command in ("dist", "geodesic"):
            return _distance(args, cfg, args.command == "geodesic")
        if args.command == "map":
            return cmd_map(args, cfg)
        if args.command == "scan":
            return cmd_scan(args, cfg)
        return cmd_suite(args, cfg)
    except (UsageError, ConfigError) as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_USAGE
    except geo.DomainError as exc:
        print(f"domain error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    except (met.NoPathFound, dist.NonpositiveJacobian, ArithmeticError, RuntimeError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

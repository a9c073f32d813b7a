"""Run configuration: a flat ``key = value`` text format with ``#`` comments."""
from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass, fields

from .geometry import TRUNCATION_DELTA, TRUNCATION_R


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    seed: int = 0
    workers: int = 1
    R: float = TRUNCATION_R
    delta: float = TRUNCATION_DELTA
    # tolerances
    tol_geodesic: float = 1e-2
    tol_exact_r: float = 1e-12
    tol_exact_rf: float = 1e-6
    tol_doubling: float = 1e-9
    tol_kernel_norm: float = 1e-6
    tol_kernel_grad: float = 1e-8
    tol_golden: float = 1e-6
    tol_mc: float = 1e-3
    tol_residual: float = 1e-6
    tol_margin: float = 1e-9
    # budgets
    geodesic_pairs_2: int = 50
    geodesic_pairs_3: int = 20
    jk_pairs: int = 10_000
    lipschitz_pairs: int = 10_000
    doubling_points: int = 100
    poisson_count: int = 100
    schwarz_count: int = 100
    h3_samples: int = 1000
    wub_pairs: int = 10_000
    qmc_nodes: int = 2**16
    solver_pairs: int = 20
    # single-command fields
    map: str = ""
    domain: str = ""
    out: str = ""

    def problems(self) -> list:
        """Names of fields violating 'tolerances > 0' and 'budgets >= 1'."""
        bad = []
        for f in fields(self):
            v = getattr(self, f.name)
            if f.name.startswith("tol_") and not v > 0:
                bad.append(f.name)
            if f.type == "int" and f.name not in ("seed",) and v < 1:
                bad.append(f.name)
        if not self.R > 0 or not self.delta > 0:
            bad.append("R/delta")
        return bad

    def to_text(self) -> str:
        lines = []
        for f in fields(self):
            v = getattr(self, f.name)
            lines.append(f"{f.name} = {repr(v) if isinstance(v, float) else v}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str, base: "RunConfig | None" = None) -> "RunConfig":
        cfg = dataclasses.replace(base) if base is not None else cls()
        types = {f.name: f.type for f in fields(cls)}
        for no, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"line {no}: expected key = value")
            key, val = (p.strip() for p in line.split("=", 1))
            if key not in types:
                raise ConfigError(f"line {no}: unknown key {key!r}")
            setattr(cfg, key, _coerce(types[key], val, key))
        return cfg

    def update(self, **values) -> "RunConfig":
        types = {f.name: f.type for f in fields(self)}
        cfg = dataclasses.replace(self)
        for k, v in values.items():
            if v is None:
                continue
            if k not in types:
                raise ConfigError(f"unknown key {k!r}")
            setattr(cfg, k, _coerce(types[k], v, k) if isinstance(v, str) else v)
        return cfg


def _coerce(kind, val, key):
    try:
        if kind == "int":
            return int(val)
        if kind == "float":
            return float(val)
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {val!r}") from exc
    return val


def default_seed() -> int:
    """QHYP_SEED overrides the default seed of 0."""
    env = os.environ.get("QHYP_SEED")
    if env is None or env == "":
        return 0
    try:
        return int(env)
    except ValueError as exc:
        raise ConfigError(f"QHYP_SEED must be an integer, got {env!r}") from exc

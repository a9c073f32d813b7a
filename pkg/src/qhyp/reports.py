"""Report records shared by the verification checks and the CLI."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

PASS = "pass"
VIOLATION = "violation"
NUMERICAL_FAILURE = "numerical-failure"


def plain(value: Any) -> Any:
    """Convert numpy scalars/arrays and dataclass-like records to JSON-ready values."""
    if isinstance(value, dict):
        return {str(k): plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return plain(value.tolist())
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating, float)):
        return float(value)
    if hasattr(value, "to_record"):
        return plain(value.to_record())
    return value


@dataclass
class VerificationReport:
    check_name: str
    params: dict = field(default_factory=dict)
    n_samples: int = 0
    sup: float = math.nan
    inf: float = math.nan
    witnesses: list = field(default_factory=list)
    residuals: dict = field(default_factory=dict)
    verdict: str = ""
    status: str = PASS

    @property
    def passed(self) -> bool:
        return self.status == PASS

    def to_record(self) -> dict:
        return plain({
            "check_name": self.check_name,
            "params": self.params,
            "n_samples": self.n_samples,
            "sup": self.sup,
            "inf": self.inf,
            "witnesses": self.witnesses,
            "residuals": self.residuals,
            "verdict": self.verdict,
            "status": self.status,
        })


def witness(x, y=None, **values) -> dict:
    return plain({"x": x, "y": y, "values": values})


def combine_status(statuses) -> str:
    statuses = list(statuses)
    if NUMERICAL_FAILURE in statuses:
        return NUMERICAL_FAILURE
    if VIOLATION in statuses:
        return VIOLATION
    return PASS

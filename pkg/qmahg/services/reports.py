from __future__ import annotations

import hashlib
import json
import logging
import math
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from qmahg.errors import ValidationError
from qmahg.models import CheckResult, ReportDocument

logger = logging.getLogger(__name__)

CHECK_KEYS = ("name", "anchor", "inputs_digest", "lhs", "rhs", "residual", "tol", "pass")
REPORT_KEYS = ("suite", "checks", "seed", "n", "mode", "elapsed_ms")


def _plain(value: Any) -> Any:
    """Nested values as JSON-ready builtins; exact numbers become their string form."""
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return _plain(value.tolist())
    if isinstance(value, (np.integer, np.floating, np.bool_)):
        return value.item()
    if isinstance(value, (Fraction, complex)):
        return str(value)
    if isinstance(value, (str, int, float, bool)) or value is None:
        return value
    return str(value)


def canonical_json(value: Any) -> str:
    return json.dumps(_plain(value), sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def inputs_digest(inputs: Any) -> str:
    return hashlib.sha256(canonical_json(inputs).encode("utf-8")).hexdigest()[:16]


def as_real(value) -> float:
    """A float for the report; complex values must be real up to rounding."""
    if isinstance(value, complex) or np.iscomplexobj(value):
        value = complex(value)
        if abs(value.imag) > 1e-9 * max(1.0, abs(value.real)):
            raise ValidationError(f"expected a real value, got {value}")
        value = value.real
    return float(value)


def relative_residual(lhs, rhs) -> float:
    lhs, rhs = as_real(lhs), as_real(rhs)
    return abs(lhs - rhs) / max(1.0, abs(lhs), abs(rhs))


def make_check(name: str, anchor: str, inputs: Any, lhs, rhs, tol: float,
               residual: Optional[float] = None, passed: Optional[bool] = None) -> CheckResult:
    """One report row. By default the residual is relative and the check passes when it is within tol."""
    if residual is None:
        residual = relative_residual(lhs, rhs)
    residual = float(residual)
    if passed is None:
        passed = residual <= tol
    check = CheckResult(
        name=name,
        anchor=anchor,
        inputs_digest=inputs_digest(inputs),
        lhs=as_real(lhs),
        rhs=as_real(rhs),
        residual=residual,
        tol=float(tol),
        passed=bool(passed),
    )
    if not check.passed:
        logger.warning(f"check '{name}' fails: {anchor} (lhs={check.lhs:.6g}, rhs={check.rhs:.6g}, "
                       f"residual={residual:.3e}, tol={tol:.1e})")
    return check


def build_report(suite: str, checks: Sequence[CheckResult], seed: int, n: int, mode: str,
                 elapsed_ms: float = 0.0) -> ReportDocument:
    return ReportDocument(suite=suite, seed=seed, n=n, mode=mode, checks=list(checks),
                          elapsed_ms=round(float(elapsed_ms), 3))


def _finite_or_text(value: float):
    return value if math.isfinite(value) else str(value)


def report_payload(report: ReportDocument) -> Dict:
    payload = report.to_dict()
    for check in payload["checks"]:
        for key in ("lhs", "rhs", "residual"):
            check[key] = _finite_or_text(check[key])
    return payload


def dumps_report(report: ReportDocument) -> str:
    return json.dumps(report_payload(report), indent=2, sort_keys=True) + "\n"


def write_report(report: ReportDocument, path: str) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(dumps_report(report))
    logger.info(f"report '{report.suite}' with {len(report.checks)} checks written to {path}")


def validate_report(payload: Dict) -> List[str]:
    """Schema problems of a decoded report; an empty list means the report is valid."""
    problems = []
    if not isinstance(payload, dict):
        return ["report root must be an object"]
    for key in REPORT_KEYS:
        if key not in payload:
            problems.append(f"missing key '{key}'")
    if problems:
        return problems
    if not isinstance(payload["suite"], str):
        problems.append("suite must be a string")
    for key in ("seed", "n"):
        if not isinstance(payload[key], int) or isinstance(payload[key], bool):
            problems.append(f"{key} must be an integer")
    if payload["mode"] not in ("rational", "float"):
        problems.append(f"unknown mode '{payload['mode']}'")
    if not isinstance(payload["elapsed_ms"], (int, float)):
        problems.append("elapsed_ms must be a number")
    if not isinstance(payload["checks"], list):
        return problems + ["checks must be a list"]
    for i, check in enumerate(payload["checks"]):
        if not isinstance(check, dict):
            problems.append(f"check {i} must be an object")
            continue
        missing = [key for key in CHECK_KEYS if key not in check]
        if missing:
            problems.append(f"check {i} lacks {', '.join(missing)}")
            continue
        if not isinstance(check["pass"], bool):
            problems.append(f"check {i}: pass must be a boolean")
        if not isinstance(check["tol"], (int, float)):
            problems.append(f"check {i}: tol must be a number")
        if not check["anchor"]:
            problems.append(f"check {i}: empty anchor")
    return problems

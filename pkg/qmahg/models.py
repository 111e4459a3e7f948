from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Dict, List, Optional, Sequence, Tuple

from qmahg.errors import ValidationError

if TYPE_CHECKING:
    from qmahg.engine.polynomial import PolyScalar


@dataclass(frozen=True)
class GroupPoint:
    """A point (x, t) of the Heisenberg group of dimension 4n+1."""

    x: Tuple
    t: object = 0

    def __post_init__(self):
        x = tuple(self.x)
        object.__setattr__(self, "x", x)
        if not x or len(x) % 4:
            raise ValidationError(f"x must have 4n coordinates, got {len(x)}")
        for c in x + (self.t,):
            if not math.isfinite(float(c)):
                raise ValidationError("GroupPoint coordinates must be finite")

    @property
    def n(self) -> int:
        return len(self.x) // 4

    def coords(self) -> Tuple:
        return self.x + (self.t,)

    @classmethod
    def from_coords(cls, coords: Sequence) -> "GroupPoint":
        coords = tuple(coords)
        return cls(x=coords[:-1], t=coords[-1])

    @classmethod
    def origin(cls, n: int) -> "GroupPoint":
        return cls(x=(0,) * (4 * n), t=0)


@dataclass(frozen=True)
class LinePoint:
    """A point (lambda, t) of the line group; lam holds the 4 real components."""

    lam: Tuple
    t: object = 0

    def __post_init__(self):
        lam = tuple(self.lam)
        object.__setattr__(self, "lam", lam)
        if len(lam) != 4:
            raise ValidationError(f"lambda must have 4 components, got {len(lam)}")
        for c in lam + (self.t,):
            if not math.isfinite(float(c)):
                raise ValidationError("LinePoint coordinates must be finite")

    def coords(self) -> Tuple:
        return self.lam + (self.t,)


@dataclass(frozen=True)
class BoxDomain:
    """Coordinate box around `center`, optionally cut down to a gauge ball.

    With `gauge_radius` set, the domain is {xi in box : ||center^-1 xi|| < r}.
    """

    center: GroupPoint
    half_widths: Tuple
    gauge_radius: Optional[float] = None

    def __post_init__(self):
        widths = tuple(float(w) for w in self.half_widths)
        object.__setattr__(self, "half_widths", widths)
        if len(widths) != 4 * self.center.n + 1:
            raise ValidationError(
                f"expected {4 * self.center.n + 1} half-widths, got {len(widths)}"
            )
        if any(not w > 0 for w in widths):
            raise ValidationError("half-widths must be positive")
        if self.gauge_radius is not None and not self.gauge_radius > 0:
            raise ValidationError("gauge radius must be positive")

    @property
    def n(self) -> int:
        return self.center.n

    def bounds(self) -> List[Tuple[float, float]]:
        return [(float(c) - w, float(c) + w) for c, w in zip(self.center.coords(), self.half_widths)]

    @classmethod
    def cube(cls, center: GroupPoint, half_width: float = 1.0) -> "BoxDomain":
        return cls(center=center, half_widths=(half_width,) * (4 * center.n + 1))

    @classmethod
    def gauge_ball(cls, center: GroupPoint, radius: float) -> "BoxDomain":
        """The Koranyi ball D(center, radius) inside its bounding box."""
        cx = math.sqrt(sum(float(c) ** 2 for c in center.x))
        widths = (radius,) * (4 * center.n) + (radius ** 2 + 2 * cx * radius,)
        return cls(center=center, half_widths=widths, gauge_radius=radius)


@dataclass(frozen=True)
class GridSpec:
    points_per_axis: int = 6
    rule: str = "midpoint"  # "midpoint" | "trapezoid"
    refinement_levels: int = 1

    def __post_init__(self):
        if self.points_per_axis < 2:
            raise ValidationError("a grid needs at least 2 points per axis")
        if self.rule not in ("midpoint", "trapezoid"):
            raise ValidationError(f"unknown quadrature rule '{self.rule}'")
        if self.refinement_levels < 0:
            raise ValidationError("refinement levels must be non-negative")

    def points_at(self, level: int) -> int:
        if self.rule == "trapezoid":
            return (self.points_per_axis - 1) * 2 ** level + 1
        return self.points_per_axis * 2 ** level


@dataclass(frozen=True)
class QuadratureSpec:
    radial_cells: int = 16
    t_cells: int = 16
    refinement_levels: int = 1

    def __post_init__(self):
        if self.radial_cells < 1 or self.t_cells < 1:
            raise ValidationError("quadrature needs at least one cell per axis")
        if self.refinement_levels < 0:
            raise ValidationError("refinement levels must be non-negative")


@dataclass(frozen=True)
class CF1Pair:
    f0: "PolyScalar"
    f1: "PolyScalar"


@dataclass
class CheckResult:
    name: str
    anchor: str
    inputs_digest: str
    lhs: float
    rhs: float
    residual: float
    tol: float
    passed: bool

    def to_dict(self) -> Dict:
        return {
            "name": self.name,
            "anchor": self.anchor,
            "inputs_digest": self.inputs_digest,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "residual": self.residual,
            "tol": self.tol,
            "pass": self.passed,
        }


@dataclass
class ReportDocument:
    suite: str
    seed: int
    n: int
    mode: str
    checks: List[CheckResult] = field(default_factory=list)
    elapsed_ms: float = 0.0

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    def to_dict(self) -> Dict:
        return {
            "suite": self.suite,
            "checks": [check.to_dict() for check in self.checks],
            "seed": self.seed,
            "n": self.n,
            "mode": self.mode,
            "elapsed_ms": self.elapsed_ms,
        }


@dataclass
class RunSettings:
    n: int
    mode: str
    seed: int
    tol: float
    report: Optional[str] = None
    record_timings: bool = True


@dataclass
class CLNResult:
    lhs: float
    bound: float
    ratio: float


@dataclass
class ComparisonResult:
    integral_u: float
    integral_v: float
    passed: bool


@dataclass
class MinPrincipleResult:
    min_closure: float
    min_boundary: float
    passed: bool
    argmin: Optional[Tuple[float, ...]] = None


@dataclass
class StokesResult:
    first: complex
    second: complex
    residual: float


@dataclass
class ConvergenceResult:
    """Integrals of chi (Delta u_j)^n along two approximating sequences."""

    target: float
    table: List[float]
    table_squared: List[float]
    limit: float
    limit_squared: float
    cauchy: bool
    passed: bool

from __future__ import annotations

from typing import Optional, Sequence


class ValidationError(ValueError):
    """Input that violates a documented precondition."""


class HypothesisViolation(ValueError):
    """A verifier hypothesis failed at a concrete sample point."""

    def __init__(self, hypothesis: str, point: Optional[Sequence[float]] = None, detail: str = ""):
        self.hypothesis = hypothesis
        self.point = tuple(float(c) for c in point) if point is not None else None
        self.detail = detail
        message = f"hypothesis '{hypothesis}' fails"
        if self.point is not None:
            coords = ", ".join(f"{c:.6g}" for c in self.point)
            message += f" at ({coords})"
        if detail:
            message += f": {detail}"
        super().__init__(message)


class ExpressionSyntaxError(ValueError):
    def __init__(self, message: str, line: int, column: int, text: str = ""):
        self.message = message
        self.line = line
        self.column = column
        self.text = text
        super().__init__(f"{message} (line {line}, column {column})")

"""Small report records shared by the checkers."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

PASS_TOL = 1e-9


@dataclass(frozen=True)
class InequalityReport:
    """``lhs <= rhs`` with the margin ``rhs - lhs``; passes when margin >= -1e-9."""

    lhs: float
    rhs: float
    instance: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)

    @property
    def margin(self) -> float:
        return self.rhs - self.lhs

    @property
    def passed(self) -> bool:
        return self.margin >= -PASS_TOL

    def as_dict(self) -> dict[str, Any]:
        return {
            "lhs": self.lhs,
            "rhs": self.rhs,
            "margin": self.margin,
            "pass": self.passed,
            "instance": self.instance,
            **({"extra": self.extra} if self.extra else {}),
        }

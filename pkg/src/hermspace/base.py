"""Shared value types and error classes."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping


class SchemeError(ValueError):
    """Weight-scheme parameterization violates a required summability or
    monotonicity condition, or an operation is unsupported for the scheme."""


class ToleranceError(RuntimeError):
    """A certified tolerance could not be reached within the configured caps.

    Carries the best tail bound that was achieved so callers can decide
    whether the partial certificate is still useful.
    """

    def __init__(self, message: str, achieved: float | None = None):
        super().__init__(message)
        self.achieved = achieved


class IllConditionedError(RuntimeError):
    """A least-squares system exceeded the condition-number cap; the caller
    should re-draw with a fresh seed."""


@dataclass(frozen=True)
class KernelResult:
    """A kernel value with a certified enclosure.

    The true value lies in [value - tail_bound, value + tail_bound].
    """

    value: float
    tail_bound: float
    terms_used: int


@dataclass(frozen=True)
class ErrorReport:
    """A worst-case error value with certificate and cost.

    The true worst-case error lies in
    [max(err - tail_bound, 0), err + tail_bound]; cost counts function
    evaluations of the underlying algorithm.
    """

    err: float
    tail_bound: float
    cost: int


@dataclass(frozen=True)
class AnchoredPoint:
    """A point of the sequence domain that differs from the anchor in
    finitely many coordinates.

    ``active`` holds (coordinate index, value) pairs sorted by index; values
    equal to the anchor are normalized away so that the active count is
    canonical.
    """

    active: tuple[tuple[int, float], ...]
    anchor: float

    @staticmethod
    def make(entries: Mapping[int, float] | Iterable[tuple[int, float]],
             anchor: float = 0.0) -> "AnchoredPoint":
        items = entries.items() if isinstance(entries, Mapping) else entries
        seen: dict[int, float] = {}
        for j, x in items:
            if not (isinstance(j, int) and j >= 1):
                raise ValueError(f"coordinate index must be a positive integer, got {j!r}")
            if j in seen:
                raise ValueError(f"duplicate coordinate index {j}")
            x = float(x)
            if x != anchor:
                seen[j] = x
        return AnchoredPoint(tuple(sorted(seen.items())), float(anchor))

    @property
    def active_count(self) -> int:
        return len(self.active)

    @property
    def active_indices(self) -> tuple[int, ...]:
        return tuple(j for j, _ in self.active)

    def coordinate(self, j: int) -> float:
        for i, x in self.active:
            if i == j:
                return x
        return self.anchor

    def restrict(self, indices: Iterable[int]) -> "AnchoredPoint":
        """Keep only the active entries whose index lies in ``indices``."""
        keep = frozenset(indices)
        return AnchoredPoint(tuple((j, x) for j, x in self.active if j in keep),
                             self.anchor)

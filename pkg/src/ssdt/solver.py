"""Guarded scalar Newton iteration for functions of known shape.

Every root-finding problem in this package involves a function that is
monotone and either convex or concave on the search interval.  For each of
the four shape combinations there is one side of the root from which the
plain Newton update converges monotonically:

    increasing + concave   start left of the root  (f < 0 there)
    decreasing + convex    start left of the root  (f > 0 there)
    increasing + convex    start right of the root (f > 0 there)
    decreasing + concave   start right of the root (f < 0 there)

The engine iterates x <- x - f(x)/f'(x) until |f(x)| <= tolerance.  An
optional guard marks a barrier (a pole or interval endpoint) that iterates
must never cross; if a step lands beyond the guard or produces a non-finite
value, the engine falls back to one bisection step against the best known
point on the far side of the root, then resumes Newton.  Identical inputs
always produce bit-identical traces.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

from .errors import GuardViolated, MaxIterationsExceeded, NonFiniteValue

DEFAULT_TOLERANCE = 1e-13
DEFAULT_MAX_ITER = 200

_MONOTONICITIES = ("increasing", "decreasing")
_CURVATURES = ("convex", "concave")


@dataclass(frozen=True)
class ShapeClass:
    monotonicity: str
    curvature: str

    def __post_init__(self) -> None:
        if self.monotonicity not in _MONOTONICITIES:
            raise ValueError(f"unknown monotonicity {self.monotonicity!r}")
        if self.curvature not in _CURVATURES:
            raise ValueError(f"unknown curvature {self.curvature!r}")

    @property
    def approaches_from_left(self) -> bool:
        """True when monotone Newton convergence happens left of the root."""
        return (self.monotonicity == "increasing") == (self.curvature == "concave")

    def past_root(self, value: float) -> bool:
        """Whether a function value indicates a point beyond the root."""
        if self.monotonicity == "increasing":
            return value > 0.0 if self.approaches_from_left else value < 0.0
        return value < 0.0 if self.approaches_from_left else value > 0.0


INCREASING_CONCAVE = ShapeClass("increasing", "concave")
INCREASING_CONVEX = ShapeClass("increasing", "convex")
DECREASING_CONCAVE = ShapeClass("decreasing", "concave")
DECREASING_CONVEX = ShapeClass("decreasing", "convex")


@dataclass
class RootReport:
    """Converged root plus the full iterate history.

    trace holds (iterate, value) pairs including the initial point, so
    len(trace) == iterations + 1.  bisection_steps counts initialization
    halvings plus any fallback bisections taken inside the Newton loop.
    """

    root: float
    residual: float
    iterations: int
    bisection_steps: int
    trace: list[tuple[float, float]] = field(default_factory=list)

    def residuals(self) -> list[float]:
        return [abs(v) for _, v in self.trace]


def newton_guarded(
    eval_fn: Callable[[float], tuple[float, float]],
    shape: ShapeClass,
    init: float,
    guard: float | None = None,
    tolerance: float = DEFAULT_TOLERANCE,
    max_iter: int = DEFAULT_MAX_ITER,
) -> RootReport:
    """Run guarded Newton from `init`, assumed on the monotone side of the root.

    eval_fn maps x to (value, derivative).  Raises MaxIterationsExceeded if
    the residual never drops below tolerance, NonFiniteValue on NaN/inf that
    cannot be rescued, GuardViolated if an iterate crosses the guard with no
    bracketing point to bisect against.
    """
    if tolerance <= 0.0:
        raise ValueError("tolerance must be positive")
    x = float(init)
    fx, dfx = eval_fn(x)
    if not math.isfinite(fx):
        raise NonFiniteValue(f"f({x!r}) = {fx!r} at the initial point")
    trace: list[tuple[float, float]] = [(x, fx)]
    above_guard = guard is None or x > guard
    bracket: float | None = None
    bisections = 0
    steps = 0

    while True:
        if abs(fx) <= tolerance:
            return RootReport(x, fx, steps, bisections, trace)
        if steps >= max_iter:
            raise MaxIterationsExceeded(
                f"|f| = {abs(fx)!r} > {tolerance!r} after {max_iter} iterations"
            )
        if shape.past_root(fx):
            bracket = x

        if math.isfinite(dfx) and dfx != 0.0:
            x_new = x - fx / dfx
        else:
            x_new = math.nan

        for _ in range(64):
            crossed = guard is not None and (
                x_new <= guard if above_guard else x_new >= guard
            )
            if math.isfinite(x_new) and not crossed:
                fx_new, dfx_new = eval_fn(x_new)
                if math.isfinite(fx_new):
                    break
            # Bad step: bisect toward the tightest known far-side point.
            if bracket is None:
                if not math.isfinite(x_new):
                    raise NonFiniteValue(
                        f"non-finite iterate after x = {x!r} and no bracket to fall back on"
                    )
                raise GuardViolated(
                    f"iterate {x_new!r} crossed guard {guard!r}; shape assumption failed"
                )
            x_new = 0.5 * (x + bracket)
            bisections += 1
        else:
            raise NonFiniteValue("bisection fallback failed to find a usable iterate")

        x, fx, dfx = x_new, fx_new, dfx_new
        steps += 1
        trace.append((x, fx))


def bisect_to_sign(
    eval_fn: Callable[[float], float],
    moving: float,
    anchor: float,
    want_sign: str,
    max_steps: int = DEFAULT_MAX_ITER,
) -> tuple[float, int]:
    """Halve `moving` toward `anchor` until eval_fn has the wanted sign.

    Returns (point, steps taken).  The caller guarantees the sign is attained
    somewhere strictly between anchor and moving (typically because the
    function diverges at the anchor).  A point already on the wanted side is
    returned unchanged with 0 steps.
    """
    if want_sign == "positive":
        matches = lambda v: v > 0.0  # noqa: E731
    elif want_sign == "negative":
        matches = lambda v: v < 0.0  # noqa: E731
    else:
        raise ValueError(f"want_sign must be 'positive' or 'negative', got {want_sign!r}")

    x = float(moving)
    for step in range(max_steps + 1):
        value = eval_fn(x)
        if math.isnan(value):
            raise NonFiniteValue(f"f({x!r}) is NaN during bisection")
        if math.isfinite(value) and matches(value):
            return x, step
        x = 0.5 * (x + anchor)
    raise MaxIterationsExceeded(
        f"no {want_sign} value found within {max_steps} halvings toward {anchor!r}"
    )

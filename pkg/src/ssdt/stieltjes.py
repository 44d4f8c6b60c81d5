"""Stieltjes transform of the limiting spectral distribution above the edge.

For lambda > lambda* the auxiliary function e(lambda) is the rightmost of
the two negative roots of F_lambda.  F_lambda is convex with F(lambda, 0) > 0,
so plain Newton from e = 0 descends monotonically onto that root; no
bisection phase is needed.  Everything else is arithmetic on kernels:

    s      = W(lambda, e)
    e'     = -(dF/dl) / (dF/de)
    s'     = dW/dl + dW/de * e'
    sbar   = gamma s + (gamma - 1)/lambda
    sbar'  = gamma s' + (1 - gamma)/lambda^2
    D      = lambda s sbar          D' by the product rule.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass
from typing import Iterable, Sequence

from .edge import detection_threshold
from .errors import EdgeViolation, MaxIterationsExceeded, NonFiniteValue
from .kernels import f_eval, w_eval
from .measure import NoiseModel
from .solver import (
    DEFAULT_TOLERANCE,
    INCREASING_CONVEX,
    RootReport,
    newton_guarded,
)

# Points within this relative margin of lambda* are rejected: the two roots
# of F_lambda collide at the edge and finite precision cannot separate them.
EDGE_MARGIN = 1e-9

_EPS = sys.float_info.epsilon


@dataclass(frozen=True)
class StieltjesPoint:
    """All transform values at a single lambda > lambda*."""

    lam: float
    e: float
    e1: float
    s: float
    s1: float
    sbar: float
    sbar1: float
    d: float
    d1: float


def e_of_lambda(
    model: NoiseModel,
    lam: float,
    tolerance: float = DEFAULT_TOLERANCE,
    init: float = 0.0,
) -> tuple[float, float, RootReport]:
    """Solve F(lambda, e) = 0 for the rightmost root; also return e'(lambda).

    The caller guarantees lambda > lambda*; below the edge F_lambda has no
    real root and the iteration cannot converge, which is reported as an
    EdgeViolation.
    """

    def f_pair(e: float) -> tuple[float, float]:
        fd = f_eval(model, lam, e)
        return fd.f, fd.f_e

    # F's magnitude scale is set by |F| at the start (roughly |e(lambda)|);
    # residuals below the rounding noise of that scale are unreachable.
    floor = 8.0 * _EPS * (1.0 + abs(f_pair(init)[0]))
    try:
        report = newton_guarded(
            f_pair,
            INCREASING_CONVEX,
            init,
            guard=None,
            tolerance=max(tolerance, floor),
        )
    except (MaxIterationsExceeded, NonFiniteValue) as exc:
        raise EdgeViolation(
            f"no real root of F at lambda = {lam!r}; "
            "the point is at or below the detection threshold"
        ) from exc
    at_root = f_eval(model, lam, report.root)
    e1 = -at_root.f_l / at_root.f_e
    return report.root, e1, report


def _point_unchecked(
    model: NoiseModel, lam: float, tolerance: float, init: float = 0.0
) -> StieltjesPoint:
    e, e1, _ = e_of_lambda(model, lam, tolerance, init)
    wd = w_eval(model, lam, e)
    s = wd.w
    s1 = wd.w_l + wd.w_e * e1
    gamma = model.gamma
    sbar = gamma * s + (gamma - 1.0) / lam
    sbar1 = gamma * s1 + (1.0 - gamma) / (lam * lam)
    d = lam * s * sbar
    d1 = s * sbar + lam * s1 * sbar + lam * s * sbar1
    return StieltjesPoint(lam, e, e1, s, s1, sbar, sbar1, d, d1)


def stieltjes_point(
    model: NoiseModel, lam: float, tolerance: float = DEFAULT_TOLERANCE
) -> StieltjesPoint:
    """Evaluate s, s', sbar, sbar', D, D' at one lambda > lambda*."""
    edge = detection_threshold(model)
    if lam <= edge * (1.0 + EDGE_MARGIN):
        raise EdgeViolation(
            f"lambda = {lam!r} is not above the detection threshold "
            f"{edge!r} (relative margin {EDGE_MARGIN})"
        )
    return _point_unchecked(model, lam, tolerance)


def stieltjes_grid(
    model: NoiseModel,
    lambdas: Sequence[float] | Iterable[float],
    tolerance: float = DEFAULT_TOLERANCE,
) -> list[StieltjesPoint]:
    """Evaluate a whole grid, warm-starting along increasing lambda runs.

    e(lambda) is increasing, so for the next larger lambda the previous root
    still lies right of the minimizer of F and Newton stays on the rightmost
    root.  Warm starts roughly halve the iteration count on dense grids.
    """
    lams = [float(v) for v in lambdas]
    edge = detection_threshold(model)
    margin = edge * (1.0 + EDGE_MARGIN)
    for lam in lams:
        if lam <= margin:
            raise EdgeViolation(
                f"grid point lambda = {lam!r} is not above the detection "
                f"threshold {edge!r}"
            )
    points: list[StieltjesPoint] = []
    prev_lam = None
    init = 0.0
    for lam in lams:
        if prev_lam is not None and lam <= prev_lam:
            init = 0.0
        points.append(_point_unchecked(model, lam, tolerance, init))
        init = points[-1].e
        prev_lam = lam
    return points

"""Detection-threshold pipeline: three nested Newton solves.

The threshold lambda* (the right support endpoint of the limiting spectral
distribution, equivalently the asymptotic operator norm of N N^T) is the
unique root of Q(lambda) = F(lambda, t(lambda)), where t(lambda) minimizes
F_lambda over the interval I_lambda.  Each Q evaluation therefore solves two
inner problems:

    1. the left endpoint e*_lambda of I_lambda, as the root of
       T_lambda(e) = G(e) - lambda/a*   (decreasing, convex on J);
    2. the minimizer t(lambda), as the root of R_lambda = dF/de
       (increasing, concave on I_lambda).

Q itself is decreasing and convex on (0, infinity), so the outer Newton run
starts below the root, reached by halving an upper bound until Q > 0.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass

from .errors import InitializationFailed, MaxIterationsExceeded
from .kernels import f_eval, r_kernel, t_kernel
from .measure import NoiseModel
from .solver import (
    DECREASING_CONVEX,
    DEFAULT_TOLERANCE,
    INCREASING_CONCAVE,
    RootReport,
    bisect_to_sign,
    newton_guarded,
)

# Inner solves run two orders of magnitude tighter than the outer tolerance
# (but never below 1e-15) so they do not pollute the outer quadratic tail.
INNER_TOLERANCE_RATIO = 100.0
INNER_TOLERANCE_FLOOR = 1e-15

# Residuals cannot drop below the rounding noise of the kernel evaluation
# itself: T is a difference of quantities of size lambda/a*, and R has unit
# scale with some cancellation amplification.  Requested tolerances below
# these floors are clamped instead of looping to a guaranteed failure.
_EPS = sys.float_info.epsilon
_R_FLOOR = 64.0 * _EPS


@dataclass
class IntervalInfo:
    """Domain bookkeeping for one lambda: J's left end and I_lambda's."""

    j_left: float
    e_star_lambda: float
    report: RootReport


@dataclass
class QPoint:
    """Minimizer and minimum of F_lambda, plus Q'(lambda)."""

    t: float
    q: float
    q1: float
    report: RootReport
    interval: IntervalInfo


@dataclass
class EdgeReports:
    endpoint: RootReport
    minimizer: RootReport
    edge: RootReport


@dataclass
class EdgeSolution:
    lambda_star: float
    q_at_root: float
    t_at_root: float
    reports: EdgeReports


def left_endpoint(
    model: NoiseModel, lam: float, tolerance: float = DEFAULT_TOLERANCE
) -> IntervalInfo:
    """Locate e*_lambda, the left endpoint of I_lambda, for lambda > 0.

    T_lambda diverges to +inf at J's left end, so halving toward it always
    reaches T > 0; Newton then converges monotonically from the left.
    """
    j_left = model.j_left
    e0 = max(0.0, j_left + 1.0)
    start, halvings = bisect_to_sign(
        lambda e: t_kernel(model, lam, e)[0], e0, j_left, "positive"
    )
    # T's evaluation noise is eps * lambda/a*, amplified near the pole of G
    # by |j_left| / (e - j_left); the start point bounds the root's pole gap
    # from below, so this clamp is conservative.  The endpoint itself stays
    # sharp: the iterate error is the residual divided by |G'|, which blows
    # up at the same rate as the noise.
    pole_factor = max(1.0, abs(j_left) / (start - j_left))
    noise_floor = 8.0 * _EPS * (1.0 + lam / model.a_star) * pole_factor
    report = newton_guarded(
        lambda e: t_kernel(model, lam, e),
        DECREASING_CONVEX,
        start,
        guard=j_left,
        tolerance=max(tolerance, noise_floor),
    )
    report.bisection_steps += halvings
    return IntervalInfo(j_left, report.root, report)


def q_point(
    model: NoiseModel, lam: float, tolerance: float = DEFAULT_TOLERANCE
) -> QPoint:
    """Evaluate t(lambda), Q(lambda) and Q'(lambda) for lambda > 0.

    R_lambda diverges to -inf at e*_lambda, so halving toward the endpoint
    reaches R < 0; Newton from there climbs monotonically to the minimizer.
    Q' needs no extra solve: dQ/dlambda = dF/dlambda at (lambda, t).
    """
    interval = left_endpoint(model, lam, tolerance)
    e_star = interval.e_star_lambda
    e0 = e_star + max(1.0, abs(e_star))
    start, halvings = bisect_to_sign(
        lambda e: r_kernel(model, lam, e)[0], e0, e_star, "negative"
    )
    report = newton_guarded(
        lambda e: r_kernel(model, lam, e),
        INCREASING_CONCAVE,
        start,
        guard=e_star,
        tolerance=max(tolerance, _R_FLOOR),
    )
    report.bisection_steps += halvings
    at_min = f_eval(model, lam, report.root)
    return QPoint(report.root, at_min.f, at_min.f_l, report, interval)


def ssdt(model: NoiseModel, tolerance: float = DEFAULT_TOLERANCE) -> EdgeSolution:
    """Compute the spectral signal detection threshold lambda*.

    Starts from the operator-norm upper bound a* b* (1 + sqrt(gamma))^2 and
    halves until Q > 0 (i.e. until the iterate is below lambda*, the monotone
    convergence side), then runs Newton on Q.
    """
    inner_tol = max(tolerance / INNER_TOLERANCE_RATIO, INNER_TOLERANCE_FLOOR)
    last: dict[str, QPoint] = {}

    def q_and_slope(lam: float) -> tuple[float, float]:
        qp = q_point(model, lam, inner_tol)
        last["qp"] = qp
        return qp.q, qp.q1

    lam0 = model.a_star * model.b_star * (1.0 + math.sqrt(model.gamma)) ** 2
    try:
        start, halvings = bisect_to_sign(
            lambda lam: q_and_slope(lam)[0], lam0, 0.0, "positive"
        )
    except MaxIterationsExceeded as exc:
        raise InitializationFailed(
            f"halving from {lam0!r} never reached Q > 0"
        ) from exc
    report = newton_guarded(
        q_and_slope, DECREASING_CONVEX, start, guard=0.0, tolerance=tolerance
    )
    report.bisection_steps += halvings
    qp = last["qp"]
    return EdgeSolution(
        lambda_star=report.root,
        q_at_root=report.residual,
        t_at_root=qp.t,
        reports=EdgeReports(qp.interval.report, qp.report, report),
    )


_THRESHOLD_CACHE_KEY = "_ssdt_threshold_cache"


def detection_threshold(
    model: NoiseModel, tolerance: float = DEFAULT_TOLERANCE
) -> float:
    """lambda* with a per-model cache (models are immutable)."""
    cached = model.__dict__.get(_THRESHOLD_CACHE_KEY)
    if cached is not None and cached[0] <= tolerance:
        return cached[1]
    value = ssdt(model, tolerance).lambda_star
    model.__dict__[_THRESHOLD_CACHE_KEY] = (tolerance, value)
    return value

"""Spiked-model parameter mapping through the D-transform.

An observed outlier eigenvalue lambda > lambda* of Y Y^T corresponds to a
population signal strength theta^2 = 1/D(lambda), and the squared cosines
between population and sample singular vectors converge to

    |<u, u_hat>|^2 -> s(lambda) D(lambda) / D'(lambda)
    |<v, v_hat>|^2 -> sbar(lambda) D(lambda) / D'(lambda).

D is positive, decreasing and convex above the edge, so the inverse mapping
theta^2 -> lambda is a guarded Newton solve on D(lambda) - 1/theta^2,
started just above the edge where that difference is positive.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .edge import detection_threshold
from .errors import UndetectableSignal
from .measure import NoiseModel
from .solver import DECREASING_CONVEX, DEFAULT_TOLERANCE, newton_guarded
from .stieltjes import EDGE_MARGIN, StieltjesPoint, _point_unchecked, stieltjes_point

_INIT_DELTA = 1e-6
_MAX_HALVINGS = 60


@dataclass(frozen=True)
class SpikeParams:
    """Observed eigenvalue, signal strength, and squared cosines."""

    lam: float
    theta2: float
    c2: float
    cbar2: float


def _params_from_point(pt: StieltjesPoint) -> SpikeParams:
    ratio = pt.d / pt.d1
    return SpikeParams(
        lam=pt.lam,
        theta2=1.0 / pt.d,
        c2=pt.s * ratio,
        cbar2=pt.sbar * ratio,
    )


def spike_from_lambda(
    model: NoiseModel, lam: float, tolerance: float = DEFAULT_TOLERANCE
) -> SpikeParams:
    """Map an asymptotic observed eigenvalue to theta^2 and the cosines."""
    return _params_from_point(stieltjes_point(model, lam, tolerance))


def detectability_threshold(
    model: NoiseModel, tolerance: float = DEFAULT_TOLERANCE
) -> float:
    """Smallest detectable signal strength, 1/D at the edge margin."""
    edge = detection_threshold(model)
    margin_lam = edge * (1.0 + EDGE_MARGIN)
    return 1.0 / _point_unchecked(model, margin_lam, tolerance).d


def lambda_from_theta(
    model: NoiseModel, theta2: float, tolerance: float = DEFAULT_TOLERANCE
) -> SpikeParams:
    """Solve D(lambda) = 1/theta^2 for the asymptotic eigenvalue.

    D is steep near the edge, so the Newton run starts at
    lambda*(1 + delta) with delta shrinking from 1e-6 until the start lies on
    the monotone side (D > 1/theta^2); for a detectable signal this always
    succeeds before delta reaches the edge margin.
    """
    if not (math.isfinite(theta2) and theta2 > 0.0):
        raise UndetectableSignal(f"theta^2 must be positive finite, got {theta2!r}")
    edge = detection_threshold(model)
    margin_lam = edge * (1.0 + EDGE_MARGIN)
    target = 1.0 / theta2
    if theta2 <= detectability_threshold(model, tolerance):
        raise UndetectableSignal(
            f"theta^2 = {theta2!r} is at or below the detectability "
            f"threshold 1/D at the edge"
        )

    last: dict[str, StieltjesPoint] = {}

    def h_pair(lam: float) -> tuple[float, float]:
        pt = _point_unchecked(model, lam, tolerance)
        last["pt"] = pt
        return pt.d - target, pt.d1

    delta = _INIT_DELTA
    start = None
    for _ in range(_MAX_HALVINGS):
        lam0 = edge * (1.0 + delta)
        if lam0 <= margin_lam:
            break
        if h_pair(lam0)[0] > 0.0:
            start = lam0
            break
        delta *= 0.5
    if start is None:
        raise UndetectableSignal(
            f"could not bracket D(lambda) = {target!r} above the edge margin"
        )

    newton_guarded(
        h_pair, DECREASING_CONVEX, start, guard=margin_lam, tolerance=tolerance
    )
    return _params_from_point(last["pt"])

"""Shared test oracles, all independent of the library's solver paths."""

from __future__ import annotations

import math
import sys

import numpy as np

from ssdt import NoiseModel, validate

EPS = sys.float_info.epsilon


def isotropic_model(gamma: float) -> NoiseModel:
    return validate([(1.0, 1.0)], [(1.0, 1.0)], gamma)


def random_model(
    rng: np.random.Generator,
    max_atoms: int = 4,
    atom_range: tuple[float, float] = (0.5, 3.0),
    gamma_range: tuple[float, float] = (0.3, 2.0),
) -> NoiseModel:
    p = int(rng.integers(1, max_atoms + 1))
    n = int(rng.integers(1, max_atoms + 1))
    a = rng.uniform(*atom_range, size=p)
    w = rng.uniform(0.2, 1.0, size=p)
    b = rng.uniform(*atom_range, size=n)
    pi = rng.uniform(0.2, 1.0, size=n)
    gamma = float(rng.uniform(*gamma_range))
    return validate(
        {"atoms": a, "weights": w / w.sum()},
        {"atoms": b, "weights": pi / pi.sum()},
        gamma,
    )


# --- Marchenko-Pastur closed forms (isotropic nu = unu = delta_1) -----------
#
# With both population spectra a single unit atom, the self-consistent
# equations reduce to a quadratic for g = G(e(lambda)):
#     g^2 - (1 + lambda - gamma) g + lambda = 0,
# and s(lambda) = 1/(g - lambda) with the branch g -> 1 as lambda -> inf.
# The edge is where the discriminant vanishes: lambda* = (1 + sqrt(gamma))^2.

def mp_edge(gamma: float) -> float:
    return (1.0 + math.sqrt(gamma)) ** 2


def _mp_g(lam: float, gamma: float) -> tuple[float, float]:
    t = 1.0 + lam - gamma
    disc = t * t - 4.0 * lam
    root = math.sqrt(disc)
    g = 0.5 * (t - root)
    g1 = 0.5 * (1.0 - (t - 2.0) / root)
    return g, g1


def mp_stieltjes(lam: float, gamma: float) -> float:
    g, _ = _mp_g(lam, gamma)
    return 1.0 / (g - lam)


def mp_stieltjes_derivative(lam: float, gamma: float) -> float:
    g, g1 = _mp_g(lam, gamma)
    return -(g1 - 1.0) / (g - lam) ** 2


def mp_sbar(lam: float, gamma: float) -> float:
    return gamma * mp_stieltjes(lam, gamma) + (gamma - 1.0) / lam


def mp_sbar_derivative(lam: float, gamma: float) -> float:
    return gamma * mp_stieltjes_derivative(lam, gamma) + (1.0 - gamma) / lam**2


def mp_d_transform(lam: float, gamma: float) -> float:
    return lam * mp_stieltjes(lam, gamma) * mp_sbar(lam, gamma)


def mp_d_derivative(lam: float, gamma: float) -> float:
    s = mp_stieltjes(lam, gamma)
    s1 = mp_stieltjes_derivative(lam, gamma)
    sb = mp_sbar(lam, gamma)
    sb1 = mp_sbar_derivative(lam, gamma)
    return s * sb + lam * s1 * sb + lam * s * sb1


def mp_stieltjes_quadrature(lam: float, gamma: float) -> float:
    """s(lambda) by direct quadrature of the MP density; fully independent."""
    from scipy.integrate import quad

    lo = (1.0 - math.sqrt(gamma)) ** 2
    hi = (1.0 + math.sqrt(gamma)) ** 2

    def density(x: float) -> float:
        return math.sqrt(max((hi - x) * (x - lo), 0.0)) / (2.0 * math.pi * gamma * x)

    bulk, _ = quad(lambda x: density(x) / (x - lam), lo, hi, limit=400)
    atom = max(0.0, 1.0 - 1.0 / gamma)
    return bulk + atom / (0.0 - lam)


# --- brute-force edge oracle -------------------------------------------------

def brute_force_edge_bracket(
    model: NoiseModel, n_lambda: int = 10_000
) -> tuple[float, float]:
    """Bracket lambda* by a dense scan for the sign change of min_e F_lambda.

    Pure-numpy reimplementation (no solver code shared with the library):
    e*_lambda by vectorized bisection on G(e) = lambda/a*, then the inner
    minimum of F_lambda by a refined grid over I_lambda.
    """
    a = np.asarray(model.nu.atoms)
    w = np.asarray(model.nu.weights)
    b = np.asarray(model.unu.atoms)
    pi = np.asarray(model.unu.weights)
    gamma = model.gamma
    a_star = a[-1]
    b_star = b[-1]
    j_left = -1.0 / (gamma * b_star)

    def g_of(e: np.ndarray) -> np.ndarray:
        return np.sum(b * pi / (1.0 + gamma * np.multiply.outer(e, b)), axis=-1)

    lam_hi = a_star * b_star * (1.0 + math.sqrt(gamma)) ** 2 * 1.00001
    lam_grid = np.geomspace(lam_hi * 1e-3, lam_hi, n_lambda)
    target = lam_grid / a_star

    # Right bisection bracket: G below the smallest target.
    e_hi0 = max(1.0, -j_left)
    while g_of(np.array([e_hi0]))[0] >= target.min():
        e_hi0 *= 2.0
    lo = np.full(n_lambda, j_left + (e_hi0 - j_left) * 1e-18)
    hi = np.full(n_lambda, e_hi0)
    for _ in range(110):
        mid = 0.5 * (lo + hi)
        above = g_of(mid) > target
        lo = np.where(above, mid, lo)
        hi = np.where(above, hi, mid)
    e_star = hi

    def min_f(
        e_pts: np.ndarray, lam: np.ndarray
    ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        # e_pts: (m, grid), lam: (m,); returns per-row (min F, argmin e,
        # local grid spacing at the argmin) for the next refinement round.
        g = g_of(e_pts)
        den = np.multiply.outer(g, a) - lam[:, None, None]
        f = e_pts - np.sum(a * w / den, axis=-1)
        valid = g < (lam / a_star)[:, None]
        f = np.where(valid, f, np.inf)
        idx = np.argmin(f, axis=1)
        rows = np.arange(len(lam))
        right = e_pts[rows, np.minimum(idx + 1, e_pts.shape[1] - 1)]
        left = e_pts[rows, np.maximum(idx - 1, 0)]
        return f[rows, idx], e_pts[rows, idx], right - left

    minima = np.empty(n_lambda)
    chunk = 512
    for start in range(0, n_lambda, chunk):
        sl = slice(start, min(start + chunk, n_lambda))
        lam = lam_grid[sl]
        es = e_star[sl]
        scale = np.maximum(1.0, np.abs(es))
        offs = np.geomspace(1e-9, 1e3, 600)
        pts = es[:, None] + scale[:, None] * offs[None, :]
        fmin, argmin, spacing = min_f(pts, lam)
        # Refinement rounds shrink the window to the neighbor spacing, so
        # resolution improves ~100x per round.
        for _ in range(3):
            span = np.maximum(spacing, scale * 1e-14)
            pts = argmin[:, None] + np.linspace(-1.0, 1.0, 201)[None, :] * span[:, None]
            pts = np.maximum(pts, (es + scale * 1e-13)[:, None])
            fmin2, argmin, spacing = min_f(pts, lam)
            fmin = np.minimum(fmin, fmin2)
        minima[sl] = fmin

    if minima[0] <= 0.0 or minima[-1] >= 0.0:
        raise AssertionError("lambda scan does not straddle the sign change")
    flip = int(np.argmax(minima < 0.0))
    return float(lam_grid[flip - 1]), float(lam_grid[flip])


# --- misc assertions ----------------------------------------------------------

def assert_superlinear_tail(residuals: list[float], floor: float = 100.0 * EPS) -> None:
    """Check r_{k+1} <= r_k^1.5 on the last three residuals, above the
    floating-point floor and once inside the r_k < 1e-4 regime."""
    tail = [abs(r) for r in residuals[-3:]]
    for rk, rk1 in zip(tail, tail[1:]):
        if rk < 1e-4:
            assert rk1 <= max(rk**1.5, floor), (
                f"tail not superlinear: {rk1} > max({rk}^1.5, {floor})"
            )


def rel_err(x: float, y: float) -> float:
    scale = max(abs(x), abs(y))
    return abs(x - y) / scale if scale else 0.0


def assert_fd_match(
    analytic: float, fd_value: float, h: float, f_scale: float, rel: float = 1e-5
) -> None:
    """Compare an analytic derivative with a centered difference.

    A centered difference of a function of magnitude f_scale carries
    cancellation noise of order eps * f_scale / (2h) regardless of the true
    derivative, so the comparison allows that floor on top of the relative
    tolerance.  It only matters where the derivative nearly vanishes.
    """
    noise = 64.0 * EPS * max(1.0, abs(f_scale)) / (2.0 * h)
    bound = rel * max(abs(analytic), abs(fd_value)) + noise
    assert abs(analytic - fd_value) <= bound, (
        f"analytic {analytic!r} vs centered difference {fd_value!r} "
        f"(allowed {bound!r})"
    )

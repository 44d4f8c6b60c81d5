"""Master-equation kernels and their analytic partial derivatives.

Every quantity the solvers touch reduces to five kernels evaluated at a
point (lambda, e):

    G(e)      = sum_j b_j pi_j / (1 + gamma b_j e)
    F(l, e)   = e - sum_i a_i w_i / (a_i G(e) - l)
    T_l(e)    = G(e) - l / a*           (root: left endpoint of I_l)
    R_l(e)    = dF/de                   (root: minimizer of F_l)
    W(l, e)   = sum_i w_i / (a_i G(e) - l)   (the Stieltjes transform at e(l))

All sums use compensated accumulation so the residual floor stays near
machine epsilon even for measures with millions of atoms.  The functions are
pure: G is recomputed on every call, nothing is cached across calls.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .accumulate import comp_sum
from .errors import SingularPoint
from .measure import DiscreteMeasure, NoiseModel

# Denominators this small signal caller logic errors (an iterate parked on a
# pole), never plausible user input.
SINGULAR_EPS = 1e-300


@dataclass(frozen=True)
class GDerivatives:
    """G and its first two derivatives at a point e."""

    g: float
    g1: float
    g2: float


@dataclass(frozen=True)
class FDerivatives:
    """F with the partials needed by the Newton solves."""

    f: float
    f_e: float
    f_l: float
    f_ee: float


@dataclass(frozen=True)
class WDerivatives:
    w: float
    w_l: float
    w_e: float


def _check_denominators(den: np.ndarray, what: str) -> None:
    if np.abs(den).min() < SINGULAR_EPS:
        raise SingularPoint(f"{what} denominator below {SINGULAR_EPS}")


def g_eval(unu: DiscreteMeasure, gamma: float, e: float) -> GDerivatives:
    """Evaluate G(e) = sum_j b_j pi_j / (1 + gamma b_j e) and derivatives.

    Termwise differentiation gives
        G'(e)  = -gamma   sum_j (b_j / (1 + gamma b_j e))^2 pi_j
        G''(e) = 2 gamma^2 sum_j (b_j / (1 + gamma b_j e))^3 pi_j
    """
    b = unu.atoms_array
    pi = unu.weights_array
    den = 1.0 + (gamma * e) * b
    _check_denominators(den, "1 + gamma*b*e")
    r = b / den
    g = comp_sum(pi * r)
    r2 = r * r
    g1 = -gamma * comp_sum(pi * r2)
    g2 = 2.0 * gamma * gamma * comp_sum(pi * (r2 * r))
    return GDerivatives(g, g1, g2)


def f_eval(model: NoiseModel, lam: float, e: float) -> FDerivatives:
    """Evaluate F(lambda, e) = e - sum_i a_i w_i / (a_i G(e) - lambda).

    Partials:
        dF/de    = 1 + G'(e) sum_i (a_i/(a_i G - l))^2 w_i
        dF/dl    = - sum_i a_i w_i / (a_i G - l)^2
        d2F/de2  = G''(e) sum_i (a_i/(a_i G - l))^2 w_i
                   - 2 G'(e)^2 sum_i (a_i/(a_i G - l))^3 w_i
    """
    gd = g_eval(model.unu, model.gamma, e)
    a = model.nu.atoms_array
    w = model.nu.weights_array
    den = a * gd.g - lam
    _check_denominators(den, "a*G(e) - lambda")
    inv = 1.0 / den
    q = a * inv
    wq = w * q
    f = e - comp_sum(wq)
    s2 = comp_sum(wq * q)
    s3 = comp_sum(wq * (q * q))
    f_e = 1.0 + gd.g1 * s2
    f_l = -comp_sum(wq * inv)
    f_ee = gd.g2 * s2 - 2.0 * gd.g1 * gd.g1 * s3
    return FDerivatives(f, f_e, f_l, f_ee)


def t_kernel(model: NoiseModel, lam: float, e: float) -> tuple[float, float]:
    """T_lambda(e) = G(e) - lambda/a* and its derivative G'(e)."""
    gd = g_eval(model.unu, model.gamma, e)
    return gd.g - lam / model.a_star, gd.g1


def r_kernel(model: NoiseModel, lam: float, e: float) -> tuple[float, float]:
    """R_lambda(e) = dF/de and its derivative d2F/de2."""
    fd = f_eval(model, lam, e)
    return fd.f_e, fd.f_ee


def w_eval(model: NoiseModel, lam: float, e: float) -> WDerivatives:
    """Evaluate W(lambda, e) = sum_i w_i / (a_i G(e) - lambda).

    Partials:
        dW/dl = sum_i w_i / (a_i G - l)^2
        dW/de = -G'(e) sum_i a_i w_i / (a_i G - l)^2
    """
    gd = g_eval(model.unu, model.gamma, e)
    a = model.nu.atoms_array
    w = model.nu.weights_array
    den = a * gd.g - lam
    _check_denominators(den, "a*G(e) - lambda")
    inv = 1.0 / den
    winv = w * inv
    value = comp_sum(winv)
    w_l = comp_sum(winv * inv)
    w_e = -gd.g1 * comp_sum(winv * (a * inv))
    return WDerivatives(value, w_l, w_e)

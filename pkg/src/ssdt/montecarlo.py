"""Finite-sample validation: simulate the noise model and measure the gap
between empirical spectral quantities and their asymptotic predictions.

Matrices are k-by-l with l = round(k/gamma).  A and B are diagonal with
deterministic atom counts (largest-remainder rounding of the weights), G has
iid Gaussian entries of variance 1/l, and the top eigenvalue of N N^T (or
Y Y^T in the spiked case) is found by power iteration applied through N, so
no k-by-k product matrix is ever formed.

Each trial draws from its own counter-based generator keyed by
(seed, trial_index); results are therefore bit-identical no matter how
trials are scheduled across workers.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .edge import detection_threshold
from .errors import ConvergenceFailure, DimensionTooSmall, EmptyInput, TooFewPoints
from .measure import DiscreteMeasure, NoiseModel
from .spike import lambda_from_theta

POWER_REL_TOL = 1e-10


@dataclass(frozen=True)
class SimConfig:
    """One experiment: model, matrix size, trial count, seed, optional spike."""

    model: NoiseModel
    k: int
    trials: int
    seed: int
    spike_theta2: float | None = None

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")
        if self.l < 1:
            raise ValueError(f"l = round(k/gamma) = {self.l} must be >= 1")
        if self.spike_theta2 is not None:
            t2 = self.spike_theta2
            if not (math.isfinite(t2) and t2 >= 0.0):
                raise ValueError(f"spike_theta2 must be finite and >= 0, got {t2!r}")

    @property
    def l(self) -> int:
        return int(round(self.k / self.model.gamma))


@dataclass(frozen=True)
class SimReport:
    """Noise-edge experiment summary."""

    values: tuple[float, ...]
    reference: float
    mean_abs_error: float
    mean_bias: float


@dataclass(frozen=True)
class SpikedSimReport:
    """Spiked experiment summary: eigenvalue plus the two cosines."""

    eigenvalues: tuple[float, ...]
    left_cosines: tuple[float, ...]
    right_cosines: tuple[float, ...]
    lambda_ref: float
    left_cos_ref: float
    right_cos_ref: float
    mean_abs_error: float
    mean_bias: float
    left_cos_error: float
    right_cos_error: float


def build_diagonal_profile(measure: DiscreteMeasure, dim: int) -> np.ndarray:
    """Deterministic diagonal of length dim realizing the measure's weights.

    Atom a_i appears round(weight_i * dim) times by the largest-remainder
    rule, ties broken toward smaller atoms; counts always sum to dim.
    """
    p = len(measure)
    if dim < p:
        raise DimensionTooSmall(f"dim = {dim} cannot host {p} distinct atoms")
    quota = measure.weights_array * dim
    counts = np.floor(quota).astype(np.int64)
    remainder = quota - counts
    missing = dim - int(counts.sum())
    if missing > 0:
        # Primary key: largest remainder; secondary: ascending atom index.
        order = np.lexsort((np.arange(p), -remainder))
        counts[order[:missing]] += 1
    return np.repeat(measure.atoms_array, counts)


def _trial_rng(seed: int, trial_index: int) -> np.random.Generator:
    seq = np.random.SeedSequence(entropy=seed, spawn_key=(trial_index,))
    return np.random.Generator(np.random.Philox(seq))


def _noise_matrix(config: SimConfig, rng: np.random.Generator) -> np.ndarray:
    k, l = config.k, config.l
    scale_rows = np.sqrt(build_diagonal_profile(config.model.nu, k))
    scale_cols = np.sqrt(build_diagonal_profile(config.model.unu, l) / l)
    g = rng.standard_normal((k, l))
    return (scale_rows[:, None] * g) * scale_cols


_POWER_BLOCK = 8


def _power_top(
    n_mat: np.ndarray, rng: np.random.Generator, rel_tol: float = POWER_REL_TOL
) -> tuple[float, np.ndarray]:
    """Top eigenvalue of n_mat @ n_mat.T and its eigenvector, matrix-free.

    Block power iteration on a small orthonormal subspace (which keeps the
    step count bounded when the top of the noise spectrum is nearly
    degenerate) with Rayleigh-quotient stopping: the leading Ritz value of
    V^T N N^T V = (N^T V)^T (N^T V) must change by less than rel_tol
    relative between steps.  Capped at 10*k steps per attempt with one
    restart from a fresh random block; if the second attempt also stalls,
    the plateau value (accurate to the gap between the leading eigenvalues)
    is returned.
    """
    k = n_mat.shape[0]
    block = min(_POWER_BLOCK, k)
    cap = 10 * k
    theta = math.nan
    basis = rng.standard_normal((k, block))
    at_theta = None
    for attempt in range(2):
        q, _ = np.linalg.qr(basis)
        theta_prev = math.inf
        for _ in range(cap):
            u = (q.T @ n_mat).T
            ritz = u.T @ u
            evals, evecs = np.linalg.eigh(ritz)
            theta = float(evals[-1])
            if not math.isfinite(theta):
                raise ConvergenceFailure("Ritz value is not finite")
            at_theta = (q, evecs)
            if abs(theta - theta_prev) <= rel_tol * theta:
                return theta, q @ evecs[:, -1]
            theta_prev = theta
            q, _ = np.linalg.qr(n_mat @ u)
        if attempt == 0:
            basis = rng.standard_normal((k, block))
    q, evecs = at_theta
    return theta, q @ evecs[:, -1]


def sample_top_noise(config: SimConfig, trial_index: int) -> float:
    """Top eigenvalue of N N^T for one simulated noise matrix."""
    rng = _trial_rng(config.seed, trial_index)
    n_mat = _noise_matrix(config, rng)
    top, _ = _power_top(n_mat, rng)
    return top


def sample_spiked(config: SimConfig, trial_index: int) -> tuple[float, float, float]:
    """Top eigenvalue of Y Y^T plus |<u, u_hat>| and |<v, v_hat>|.

    Y = theta u v^T + N with u, v uniformly random unit vectors.  Draw order
    within the trial stream is fixed: G, then u, then v, then the power
    iteration start vector.
    """
    if config.spike_theta2 is None:
        raise ValueError("config.spike_theta2 is required for spiked sampling")
    rng = _trial_rng(config.seed, trial_index)
    n_mat = _noise_matrix(config, rng)
    u = rng.standard_normal(config.k)
    u /= np.linalg.norm(u)
    v = rng.standard_normal(config.l)
    v /= np.linalg.norm(v)
    theta = math.sqrt(config.spike_theta2)
    y = n_mat + theta * np.outer(u, v)
    top, u_hat = _power_top(y, rng)
    yt_u = y.T @ u_hat
    v_hat = yt_u / np.linalg.norm(yt_u)
    return top, float(abs(u @ u_hat)), float(abs(v @ v_hat))


def error_stats(values: Sequence[float], reference: float) -> tuple[float, float]:
    """Mean absolute relative error and mean relative bias versus reference.

    mean_abs_error = (1/M) sum |ref - v_j| / ref
    mean_bias      = (1/M) sum (ref - v_j) / ref
    """
    arr = np.asarray(values, dtype=np.float64)
    if arr.size == 0:
        raise EmptyInput("no values to aggregate")
    if reference == 0.0:
        raise ValueError("reference must be nonzero")
    rel = (reference - arr) / reference
    return float(np.mean(np.abs(rel))), float(np.mean(rel))


def slope_fit(log2_dims: Sequence[float], log_errors: Sequence[float]) -> float:
    """Least-squares slope of log_errors against ln(k) = log2(k) * ln 2."""
    if len(log2_dims) != len(log_errors):
        raise ValueError("log2_dims and log_errors must have equal length")
    if len(log2_dims) < 3:
        raise TooFewPoints("slope fit needs at least 3 points")
    x = np.asarray(log2_dims, dtype=np.float64) * math.log(2.0)
    y = np.asarray(log_errors, dtype=np.float64)
    return float(np.polyfit(x, y, 1)[0])


def _map_trials(fn, config: SimConfig, workers: int) -> list:
    indices = range(config.trials)
    if workers <= 1:
        return [fn(config, j) for j in indices]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda j: fn(config, j), indices))


def run_edge_experiment(config: SimConfig, workers: int = 1) -> SimReport:
    """All trials of the noise-edge experiment, aggregated against lambda*."""
    reference = detection_threshold(config.model)
    values = _map_trials(sample_top_noise, config, workers)
    mean_abs, bias = error_stats(values, reference)
    return SimReport(tuple(values), reference, mean_abs, bias)


def run_spiked_experiment(config: SimConfig, workers: int = 1) -> SpikedSimReport:
    """All trials of the spiked experiment, aggregated against the D-transform
    predictions (asymptotic eigenvalue and singular-vector cosines)."""
    if config.spike_theta2 is None:
        raise ValueError("config.spike_theta2 is required for the spiked experiment")
    params = lambda_from_theta(config.model, config.spike_theta2)
    c_ref = math.sqrt(params.c2)
    cbar_ref = math.sqrt(params.cbar2)
    triples = _map_trials(sample_spiked, config, workers)
    eigs = tuple(t[0] for t in triples)
    left = tuple(t[1] for t in triples)
    right = tuple(t[2] for t in triples)
    mean_abs, bias = error_stats(eigs, params.lam)
    left_err, _ = error_stats(left, c_ref)
    right_err, _ = error_stats(right, cbar_ref)
    return SpikedSimReport(
        eigenvalues=eigs,
        left_cosines=left,
        right_cosines=right,
        lambda_ref=params.lam,
        left_cos_ref=c_ref,
        right_cos_ref=cbar_ref,
        mean_abs_error=mean_abs,
        mean_bias=bias,
        left_cos_error=left_err,
        right_cos_error=right_err,
    )

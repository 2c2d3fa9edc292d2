"""Baseline regularizers: truncated SVD, Tikhonov and a Morozov variant.

All solvers work in the spectral coordinates of a precomputed
factorization and return the same :class:`~minpinv.mpmi.SolveReport`
shape as the main method, including the spectral condition number of
the effective solving operator.
"""

from dataclasses import dataclass

import numpy as np

from .errors import InputError, SolverError
from .linalg import require_vector
from .mpmi import SolveReport, residual_floor

__all__ = [
    "tsvd_rank_by_discrepancy",
    "tsvd_rank_by_matrix_error",
    "tsvd_solve",
    "TikhonovSpectrum",
    "tikhonov_spectrum",
    "tikhonov_solve",
    "MorozovSpectrum",
    "morozov_spectrum",
    "morozov_solve",
    "discrepancy_alpha",
]


def _coeff_tails(coeffs):
    """tails[r] = sum of squared coefficients past index r (0-based rank)."""
    sq = coeffs * coeffs
    return np.concatenate([np.cumsum(sq[::-1])[::-1], [0.0]])


def tsvd_rank_by_discrepancy(factors, u, delta_abs):
    """Smallest kept rank whose coefficient tail fits the noise target.

    The target is delta_abs^2 plus the squared residual floor; the tail
    is a nonincreasing step function of the rank, so this is its
    discrete generalized root.
    """
    if delta_abs <= 0.0:
        raise InputError("noise bound must be positive")
    coeffs = factors.project_rhs(u)
    floor_sq = float(np.sum(coeffs[factors.rank:] ** 2))
    target = delta_abs * delta_abs + floor_sq
    u_norm_sq = float(np.sum(coeffs * coeffs))
    if target >= u_norm_sq:
        raise SolverError(
            "noise dominates signal",
            f"target residual^2 {target} >= ||u||^2 {u_norm_sq}",
        )
    tails = _coeff_tails(coeffs)
    for rank in range(factors.rank + 1):
        if tails[rank] <= target:
            return max(rank, 1)
    return factors.rank


def tsvd_rank_by_matrix_error(sigma, matrix_error):
    """Minimal rank whose spectral tail energy fits a matrix error bound.

    Returns the unique kappa with
    sqrt(sum_{k>kappa} sigma_k^2) <= matrix_error < sqrt(sum_{k>=kappa} sigma_k^2).
    """
    sigma = require_vector(sigma, "spectrum")
    if matrix_error <= 0.0:
        raise InputError("matrix error bound must be positive")
    tails = _coeff_tails(sigma)
    if matrix_error * matrix_error >= tails[0]:
        raise SolverError(
            "zero-rank truncation",
            f"error bound {matrix_error} >= total spectral energy",
        )
    target = matrix_error * matrix_error
    for kappa in range(1, len(sigma) + 1):
        if tails[kappa] <= target:
            return kappa
    return len(sigma)


def tsvd_solve(factors, u, rank):
    """Solution through the rank-truncated spectrum."""
    if not 1 <= rank <= factors.rank:
        raise InputError(
            f"truncation rank {rank} outside 1..{factors.rank}"
        )
    rank = int(rank)
    coeffs = factors.project_rhs(u)
    z = factors.v[:, :rank] @ (coeffs[:rank] / factors.sigma[:rank])
    resid_sq = float(np.sum(coeffs[rank:] ** 2))
    return SolveReport(
        solution=z,
        method="tsvd",
        parameter=rank,
        effective_rank=rank,
        condition_number=float(factors.sigma[0] / factors.sigma[rank - 1]),
        residual=float(np.sqrt(resid_sq)),
        residual_floor=residual_floor(factors, u),
    )


@dataclass(frozen=True)
class TikhonovSpectrum:
    """Spectral data of the Tikhonov operator at a fixed alpha."""

    alpha: float
    filter_factors: np.ndarray  # sigma_k / (alpha + sigma_k^2), k <= rank
    cond: float                 # extreme ratio of (alpha + sigma_k^2) / sigma_k


def tikhonov_spectrum(factors, alpha):
    if alpha <= 0.0:
        raise InputError("regularization parameter must be positive")
    sigma = factors.sigma[: factors.rank]
    inverse_scale = (alpha + sigma * sigma) / sigma
    return TikhonovSpectrum(
        alpha=float(alpha),
        filter_factors=1.0 / inverse_scale,
        cond=float(np.max(inverse_scale) / np.min(inverse_scale)),
    )


def tikhonov_solve(factors, u, alpha):
    """Classical quadratic regularization in spectral form."""
    spectrum = tikhonov_spectrum(factors, alpha)
    rank = factors.rank
    coeffs = factors.project_rhs(u)
    z = factors.v[:, :rank] @ (spectrum.filter_factors * coeffs[:rank])
    sigma = factors.sigma[:rank]
    damping = alpha / (alpha + sigma * sigma)
    floor = residual_floor(factors, u)
    resid_sq = float(np.sum((damping * coeffs[:rank]) ** 2)) + floor * floor
    return SolveReport(
        solution=z,
        method="tr",
        parameter=float(alpha),
        effective_rank=rank,
        condition_number=spectrum.cond,
        residual=float(np.sqrt(resid_sq)),
        residual_floor=floor,
    )


@dataclass(frozen=True)
class MorozovSpectrum:
    alpha: float
    filter_factors: np.ndarray  # sigma_k^3 / (alpha + sigma_k^2)^2
    cond: float


def morozov_spectrum(factors, alpha):
    if alpha <= 0.0:
        raise InputError("regularization parameter must be positive")
    sigma = factors.sigma[: factors.rank]
    inverse_scale = (alpha + sigma * sigma) ** 2 / sigma ** 3
    return MorozovSpectrum(
        alpha=float(alpha),
        filter_factors=1.0 / inverse_scale,
        cond=float(np.max(inverse_scale) / np.min(inverse_scale)),
    )


def morozov_solve(factors, u, alpha):
    """The doubly-damped regularization variant."""
    spectrum = morozov_spectrum(factors, alpha)
    rank = factors.rank
    coeffs = factors.project_rhs(u)
    z = factors.v[:, :rank] @ (spectrum.filter_factors * coeffs[:rank])
    sigma = factors.sigma[:rank]
    # 1 - sigma * g = alpha (alpha + 2 sigma^2) / (alpha + sigma^2)^2
    damping = alpha * (alpha + 2.0 * sigma * sigma) / (alpha + sigma * sigma) ** 2
    floor = residual_floor(factors, u)
    resid_sq = float(np.sum((damping * coeffs[:rank]) ** 2)) + floor * floor
    return SolveReport(
        solution=z,
        method="morozov",
        parameter=float(alpha),
        effective_rank=rank,
        condition_number=spectrum.cond,
        residual=float(np.sqrt(resid_sq)),
        residual_floor=floor,
    )


def _tikhonov_residual_sq(factors, coeffs, floor_sq, alpha):
    sigma = factors.sigma[: factors.rank]
    damping = alpha / (alpha + sigma * sigma)
    return float(np.sum((damping * coeffs[: factors.rank]) ** 2)) + floor_sq


def _morozov_residual_sq(factors, coeffs, floor_sq, alpha):
    sigma = factors.sigma[: factors.rank]
    s2 = sigma * sigma
    damping = alpha * (alpha + 2.0 * s2) / (alpha + s2) ** 2
    return float(np.sum((damping * coeffs[: factors.rank]) ** 2)) + floor_sq


def discrepancy_alpha(factors, u, delta_abs, method="tr"):
    """Regularization parameter matching the residual to the noise level.

    Bisection on log(alpha) over [eps * sigma_1^2, 1e6 * sigma_1^2]; the
    spectral residual is continuous and strictly increasing in alpha, so
    the bracket either contains the root or the data is out of reach.
    """
    if delta_abs <= 0.0:
        raise InputError("noise bound must be positive")
    if method == "tr":
        residual_sq = _tikhonov_residual_sq
    elif method == "morozov":
        residual_sq = _morozov_residual_sq
    else:
        raise InputError(f"unknown discrepancy method {method!r}")
    coeffs = factors.project_rhs(u)
    floor_sq = float(np.sum(coeffs[factors.rank:] ** 2))
    target = delta_abs * delta_abs + floor_sq
    u_norm_sq = float(np.sum(coeffs * coeffs))
    if target >= u_norm_sq:
        raise SolverError(
            "noise dominates signal",
            f"target residual^2 {target} >= ||u||^2 {u_norm_sq}",
        )
    top = float(factors.sigma[0]) ** 2
    lo, hi = np.finfo(np.float64).eps * top, 1e6 * top
    tol = 1e-10 * u_norm_sq
    f_lo = residual_sq(factors, coeffs, floor_sq, lo)
    f_hi = residual_sq(factors, coeffs, floor_sq, hi)
    if f_lo > target + tol or f_hi < target - tol:
        raise SolverError(
            "bracket exhausted",
            f"residual^2 at bracket ends [{f_lo}, {f_hi}] misses target {target}",
        )
    log_lo, log_hi = np.log(lo), np.log(hi)
    for _ in range(300):
        log_mid = 0.5 * (log_lo + log_hi)
        alpha = float(np.exp(log_mid))
        value = residual_sq(factors, coeffs, floor_sq, alpha)
        if abs(value - target) <= tol:
            return alpha
        if value < target:
            log_lo = log_mid
        else:
            log_hi = log_mid
    raise SolverError(
        "bracket exhausted",
        "discrepancy bisection did not reach tolerance",
    )

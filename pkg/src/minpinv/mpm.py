"""Minimal pseudoinverse of an approximately known matrix (MPM method).

Given the data matrix and a Frobenius error bound on it, the method
inflates each singular value by the quartic-law factor x in [1, 3/2]
(or truncates it) so that the modified matrix stays within the error
bound while its pseudoinverse norm is minimal.  The filter level that
spends exactly the allowed error budget is a generalized root of a
monotone, left-continuous spectral distance function with analytically
known breakpoints.
"""

from dataclasses import dataclass

import numpy as np

from . import _kernels
from ._kernels import QUARTIC_MAX
from .errors import InputError, SolverError
from .linalg import (
    apply_filtered_pinv,
    assemble_filtered_matrix,
    assemble_filtered_pinv,
    require_matrix,
    require_vector,
    svd,
)

__all__ = [
    "QUARTIC_MAX",
    "quartic_root",
    "filtered_sigma_value",
    "spectrum_distance_sq",
    "solve_level",
    "MpmSpectrum",
    "MpmResult",
    "minimal_pseudoinverse",
    "solve_generalized_root",
    "level_breakpoints",
]


def quartic_root(t):
    """The unique x in [1, 3/2] with x**4 - x**3 = t, for t in [0, 27/16]."""
    if not 0.0 <= t <= QUARTIC_MAX:
        raise InputError(f"quartic right side {t} outside [0, 27/16]")
    return float(_kernels.quartic_roots(_kernels.as_kernel_array([t]))[0])


def level_breakpoints(sigma):
    """Truncation levels (27/16) * sigma_k**4, bit-identical to the kernels.

    The fourth power is computed as chained products: ``sigma**4`` can
    differ in the last ulp, and the breakpoint comparisons inside the
    kernels are exact.
    """
    sigma = np.asarray(sigma, dtype=np.float64)
    return QUARTIC_MAX * (sigma * sigma * sigma * sigma)


def filtered_sigma_value(rho, level):
    """One filtered singular value: rho * x at or below its breakpoint, else 0.

    At the breakpoint exactly the nonzero (left-continuous) branch is
    taken, giving rho * 3/2.
    """
    if rho <= 0.0:
        raise InputError("singular value must be positive")
    if level < 0.0:
        raise InputError("filter level must be nonnegative")
    return rho * float(
        _kernels.filter_x(_kernels.as_kernel_array([rho]), float(level))[0]
    )


def _check_spectrum(sigma):
    sigma = require_vector(sigma, "spectrum")
    if np.any(sigma < 0.0):
        raise InputError("spectrum entries must be nonnegative")
    if np.any(np.diff(sigma) > 0.0):
        raise InputError("spectrum must be nonincreasing")
    return _kernels.as_kernel_array(sigma)


def spectrum_distance_sq(level, sigma):
    """Squared Frobenius distance between filtered and original spectrum."""
    sigma = _check_spectrum(sigma)
    if level < 0.0:
        raise InputError("filter level must be nonnegative")
    return float(_kernels.spectrum_distance_sq(sigma, float(level)))


def solve_generalized_root(eval_fn, breaks, jumps, target, tol_abs, max_iter=200):
    """Generalized root of a nondecreasing left-continuous function.

    ``eval_fn`` is the (left-continuous) function of the level,
    ``breaks`` its ascending distinct discontinuity points and
    ``jumps[i]`` the jump height at ``breaks[i]``.  Returns
    ``(level, jumped)`` where either the interior root satisfies
    |f(level) - target| <= tol_abs, or ``level`` is a breakpoint whose
    left/right values sandwich the target.  The caller must ensure
    f(0) < target < sup f.
    """
    prev = 0.0
    for brk, jump in zip(breaks, jumps):
        left = eval_fn(brk)
        if target <= left:
            lo, hi = prev, brk
            for _ in range(max_iter):
                mid = 0.5 * (lo + hi)
                if mid <= lo or mid >= hi:
                    break
                val = eval_fn(mid)
                if abs(val - target) <= tol_abs:
                    return mid, False
                if val < target:
                    lo = mid
                else:
                    hi = mid
            return hi, False
        if target <= left + jump:
            return float(brk), True
        prev = brk
    raise SolverError(
        "bracket exhausted",
        f"no generalized root below the plateau for target {target}",
    )


def solve_level(matrix_error, sigma):
    """Filter level matching a matrix error budget: distance = error**2.

    Returns ``(level, jumped)``.  Raises when the squared budget reaches
    the total spectral energy (total annihilation).
    """
    if matrix_error <= 0.0:
        raise InputError("matrix error bound must be positive")
    sigma = _check_spectrum(sigma)
    positive = sigma[sigma > 0.0]
    total_energy = float(np.sum(positive * positive))
    target = matrix_error * matrix_error
    if target >= total_energy:
        raise SolverError(
            "error level exceeds matrix energy",
            f"error^2 {target} >= total {total_energy}",
        )
    breaks_all = level_breakpoints(positive)
    order = np.argsort(breaks_all, kind="stable")
    breaks, jumps = [], []
    for idx in order:
        brk = float(breaks_all[idx])
        # (3/2 rho - rho)^2 = rho^2/4 flips to rho^2 past the breakpoint
        jump = 0.75 * float(positive[idx]) ** 2
        if breaks and brk == breaks[-1]:
            jumps[-1] += jump
        else:
            breaks.append(brk)
            jumps.append(jump)

    def distance(level):
        return float(_kernels.spectrum_distance_sq(sigma, level))

    return solve_generalized_root(
        distance, breaks, jumps, target, tol_abs=1e-12 * target
    )


@dataclass(frozen=True)
class MpmSpectrum:
    """Filtered-spectrum report of one minimal-pseudoinverse run."""

    sigma: np.ndarray          # original singular values
    level_breaks: np.ndarray   # (27/16) sigma_k^4, nonincreasing
    level: float               # chosen filter level
    filtered_sigma: np.ndarray
    jumped: bool               # level landed on a breakpoint

    @property
    def rank(self):
        return int(np.sum(self.filtered_sigma > 0.0))


@dataclass(frozen=True)
class MpmResult:
    pinv: np.ndarray
    matrix: np.ndarray
    spectrum: MpmSpectrum


def filtered_spectrum(sigma, level):
    """Filtered singular values sigma_k * x_k(level) as an array."""
    sigma = _kernels.as_kernel_array(sigma)
    x = _kernels.filter_x(sigma, float(level))
    return sigma * x


def minimal_pseudoinverse(a, matrix_error, factors=None):
    """Minimal pseudoinverse and matrix for data ``a`` with error bound.

    ``factors`` may carry a precomputed SVD of ``a``.  The distance
    between the returned matrix and ``a`` never exceeds the bound
    (modulo rounding in the factorization).
    """
    a = require_matrix(a)
    if factors is None:
        factors = svd(a)
    spectrum_raw = factors.sigma
    level, jumped = solve_level(matrix_error, spectrum_raw)
    filtered = filtered_spectrum(spectrum_raw, level)
    spectrum = MpmSpectrum(
        sigma=spectrum_raw,
        level_breaks=level_breakpoints(spectrum_raw),
        level=level,
        filtered_sigma=filtered,
        jumped=jumped,
    )
    return MpmResult(
        pinv=assemble_filtered_pinv(factors, filtered),
        matrix=assemble_filtered_matrix(factors, filtered),
        spectrum=spectrum,
    )


def apply_minimal_pseudoinverse(factors, matrix_error, u):
    """Solve with the minimal pseudoinverse without materializing it."""
    u = require_vector(u, "right-hand side")
    level, jumped = solve_level(matrix_error, factors.sigma)
    filtered = filtered_spectrum(factors.sigma, level)
    z = apply_filtered_pinv(factors, filtered, u)
    spectrum = MpmSpectrum(
        sigma=factors.sigma,
        level_breaks=level_breakpoints(factors.sigma),
        level=level,
        filtered_sigma=filtered,
        jumped=jumped,
    )
    return z, spectrum

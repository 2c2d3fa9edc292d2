"""Solving Az = u with exact matrix and noisy right-hand side (MPMI method).

The singular spectrum of the exact matrix is inflated by a family of
filter factors x_k(h) >= 1 that truncate past per-index breakpoints.
The filter level h is chosen so that the solution residual matches the
noise level (discrepancy principle): the squared residual is monotone
and left-continuous in h, so the equation has a generalized root that
may land on a breakpoint (a "jump root").  Inflation strictly shrinks
the working spectrum's extreme-value ratio, so the effective operator
is better conditioned than the original matrix; at a jump root the
improvement is at least one and a half fold on the surviving block.

``FilterFamily`` carries the family contract; the quartic-law
``MpmiFilterFamily`` is the shipped instance.
"""

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import InputError, SolverError
from .linalg import SvdFactors, apply_filtered_pinv, require_vector, svd
from .mpm import level_breakpoints, solve_generalized_root

__all__ = [
    "FilterFamily",
    "MpmiFilterFamily",
    "mpmi_x",
    "residual_floor",
    "discrepancy_sq",
    "DiscrepancyCurve",
    "discrepancy_curve",
    "solve_filter_level",
    "filtered_condition_number",
    "SolveReport",
    "mpmi_solve",
]


class FilterFamily:
    """Contract for spectral filter factor families x_k(h), k = 1..rank.

    Requirements on each member (h in (0, cap]):
      * 1 < x_k(h) <= upper_bounds[k] while h <= breaks[k];
      * x_k(0) = x_k(+0) = 1 and x_k vanishes past its breakpoint;
      * left continuity in h;
      * 1/x_k(h) (0 once truncated) nonincreasing in h.

    ``slopes`` give the small-h expansion x_k(h) ~ 1 + slopes[k] * h.
    """

    sigma: np.ndarray
    breaks: np.ndarray
    cap: float
    upper_bounds: np.ndarray
    slopes: np.ndarray

    @property
    def rank(self):
        return len(self.sigma)

    def x_values(self, level):
        """Array of x_k(level) for k = 1..rank; 0 marks truncation."""
        raise NotImplementedError

    def theta_values(self, level):
        """1/x_k(level) for survivors, 0 for truncated indices."""
        x = self.x_values(level)
        return np.where(x > 0.0, 1.0 / np.where(x > 0.0, x, 1.0), 0.0)


class MpmiFilterFamily(FilterFamily):
    """Quartic inflation law: x solves x**4 - x**3 = h / sigma_k**4."""

    def __init__(self, sigma, rank=None):
        sigma = _kernels.as_kernel_array(sigma)
        if rank is None:
            rank = int(np.sum(sigma > 0.0))
        if rank < 1 or rank > len(sigma):
            raise InputError(f"filter family rank {rank} out of range")
        if sigma[rank - 1] <= 0.0:
            raise InputError("filter family needs positive singular values")
        self.sigma = sigma[:rank].copy()
        self.breaks = level_breakpoints(self.sigma)
        self.cap = 1.5 * float(self.breaks[0])
        self.upper_bounds = np.full(rank, 1.5)
        self.slopes = self.sigma ** -4.0

    def x_values(self, level):
        if level < 0.0:
            raise InputError("filter level must be nonnegative")
        return _kernels.filter_x(self.sigma, float(level))


def mpmi_x(rho, level):
    """Scalar quartic filter factor for one singular value."""
    if rho <= 0.0:
        raise InputError("singular value must be positive")
    if level < 0.0:
        raise InputError("filter level must be nonnegative")
    return float(_kernels.filter_x(_kernels.as_kernel_array([rho]), float(level))[0])


def residual_floor(factors, u):
    """Norm of the right-hand side component outside the matrix range.

    Computed as the coordinate tail of U^T u past the numerical rank;
    equals the residual of the plain normal pseudosolution.
    """
    coeffs = factors.project_rhs(u)
    tail = coeffs[factors.rank:]
    return float(np.sqrt(np.sum(tail * tail)))


def discrepancy_sq(level, factors, coeffs, family):
    """Squared solution residual at a filter level, in spectral form.

    ``coeffs`` are U^T u.  The head sums (1 - theta[x_k])^2 over the
    numerical-rank block; the tail (the squared residual floor) is
    unreachable by any filter.
    """
    rank = family.rank
    if level < 0.0:
        raise InputError("filter level must be nonnegative")
    head_sq = coeffs[:rank] ** 2
    theta = family.theta_values(level)
    head = float(np.sum((1.0 - theta) ** 2 * head_sq))
    tail = coeffs[rank:]
    return head + float(np.sum(tail * tail))


@dataclass(frozen=True)
class DiscrepancyCurve:
    """Sampled squared-residual curve with its breakpoint jump values."""

    levels: np.ndarray
    values: np.ndarray          # squared residuals on the level grid
    break_levels: np.ndarray    # ascending distinct breakpoints
    break_left: np.ndarray      # value at the breakpoint (left-continuous)
    break_right: np.ndarray     # right limit past the breakpoint
    floor_sq: float             # value at level 0
    plateau_sq: float           # value past the largest breakpoint


def _ascending_breaks(family, coeffs_sq):
    """Deduplicated ascending breakpoints with squared-coefficient jumps.

    theta drops from 1/upper_bound to 0 at each breakpoint, so index k
    jumps by (1 - (1 - 1/c_k)^2) * v_k^2.
    """
    order = np.argsort(family.breaks, kind="stable")
    breaks, jumps = [], []
    for idx in order:
        brk = float(family.breaks[idx])
        edge = 1.0 - 1.0 / float(family.upper_bounds[idx])
        jump = (1.0 - edge * edge) * float(coeffs_sq[idx])
        if breaks and brk == breaks[-1]:
            jumps[-1] += jump
        else:
            breaks.append(brk)
            jumps.append(jump)
    return breaks, jumps


def discrepancy_curve(factors, u, family=None, num=257):
    """Sample the squared-residual curve for plotting/reporting."""
    coeffs = factors.project_rhs(u)
    if family is None:
        family = MpmiFilterFamily(factors.sigma, factors.rank)
    rank = family.rank
    floor_sq = float(np.sum(coeffs[rank:] ** 2))
    plateau_sq = floor_sq + float(np.sum(coeffs[:rank] ** 2))
    breaks, jumps = _ascending_breaks(family, coeffs[:rank] ** 2)
    top = breaks[-1]
    levels = np.concatenate([[0.0], np.geomspace(breaks[0] * 1e-3, top * 1.05, num - 1)])
    if isinstance(family, MpmiFilterFamily):
        heads = _kernels.discrepancy_head_sq_grid(
            family.sigma, _kernels.as_kernel_array(coeffs[:rank] ** 2),
            _kernels.as_kernel_array(levels),
        )
        values = heads + floor_sq
    else:
        values = np.array(
            [discrepancy_sq(float(lv), factors, coeffs, family) for lv in levels]
        )
    lefts = np.array(
        [discrepancy_sq(b, factors, coeffs, family) for b in breaks]
    )
    rights = lefts + np.array(jumps)
    return DiscrepancyCurve(
        levels=levels,
        values=values,
        break_levels=np.array(breaks),
        break_left=lefts,
        break_right=rights,
        floor_sq=floor_sq,
        plateau_sq=plateau_sq,
    )


def solve_filter_level(factors, u, delta_abs, family=None, with_curve=True):
    """Generalized root of: squared residual = delta_abs^2 + floor^2.

    Returns ``(level, curve, jumped)``; ``curve`` is None when
    ``with_curve`` is False.  Raises "noise dominates signal" when the
    target reaches the plateau ||u||^2.
    """
    if delta_abs <= 0.0:
        raise InputError("noise bound must be positive")
    u = require_vector(u, "right-hand side")
    coeffs = factors.project_rhs(u)
    if family is None:
        family = MpmiFilterFamily(factors.sigma, factors.rank)
    rank = family.rank
    coeffs_sq = coeffs[:rank] ** 2
    floor_sq = float(np.sum(coeffs[rank:] ** 2))
    u_norm_sq = float(u @ u)
    target = delta_abs * delta_abs + floor_sq
    if target >= u_norm_sq:
        raise SolverError(
            "noise dominates signal",
            f"target residual^2 {target} >= ||u||^2 {u_norm_sq}",
        )
    breaks, jumps = _ascending_breaks(family, coeffs_sq)

    if isinstance(family, MpmiFilterFamily):
        sig = family.sigma
        vsq = _kernels.as_kernel_array(coeffs_sq)

        def total(level):
            return float(_kernels.discrepancy_head_sq(sig, vsq, level)) + floor_sq
    else:
        def total(level):
            return discrepancy_sq(level, factors, coeffs, family)

    level, jumped = solve_generalized_root(
        total, breaks, jumps, target, tol_abs=1e-12 * u_norm_sq
    )
    curve = discrepancy_curve(factors, u, family) if with_curve else None
    return level, curve, jumped


def filtered_condition_number(factors, family, level):
    """Extreme-value ratio of the surviving filtered spectrum.

    The quartic inflation preserves nonincreasing order, so this equals
    the first-to-last ratio of the surviving block.
    """
    x = family.x_values(level)
    filtered = family.sigma * x
    live = filtered > 0.0
    if not np.any(live):
        raise SolverError(
            "undefined condition number", "all filtered singular values are zero"
        )
    live_vals = filtered[live]
    return float(np.max(live_vals) / np.min(live_vals))


@dataclass(frozen=True)
class SolveReport:
    """Outcome of one regularized solve."""

    solution: np.ndarray
    method: str
    parameter: float            # filter level, alpha, or rank
    effective_rank: int
    condition_number: float
    residual: float             # ||A z - u|| of the returned solution
    residual_floor: float       # part of u unreachable from the range
    jump_root: bool = False
    curve: DiscrepancyCurve | None = field(default=None, repr=False, compare=False)

    def to_dict(self, solution_inline=True):
        out = {
            "method": self.method,
            "parameter": self.parameter,
            "effective_rank": self.effective_rank,
            "condition_number": self.condition_number,
            "residual": self.residual,
            "residual_floor": self.residual_floor,
            "jump_root": self.jump_root,
        }
        if solution_inline:
            out["solution"] = [float(z) for z in self.solution]
        return out


def mpmi_solve(a, u, delta_abs, with_curve=False):
    """Full pipeline: filter level by discrepancy, then filtered solve.

    ``a`` is the exact matrix or its precomputed :class:`SvdFactors`.
    ``delta_abs`` is the absolute noise bound on ``u``.
    """
    factors = a if isinstance(a, SvdFactors) else svd(a)
    u = require_vector(u, "right-hand side")
    family = MpmiFilterFamily(factors.sigma, factors.rank)
    level, curve, jumped = solve_filter_level(
        factors, u, delta_abs, family, with_curve=with_curve
    )
    x = family.x_values(level)
    filtered = np.zeros(len(factors.sigma))
    filtered[: family.rank] = family.sigma * x
    z = apply_filtered_pinv(factors, filtered, u)
    coeffs = factors.project_rhs(u)
    theta = family.theta_values(level)
    head = float(np.sum((1.0 - theta) ** 2 * coeffs[: family.rank] ** 2))
    floor = residual_floor(factors, u)
    return SolveReport(
        solution=z,
        method="mpmi",
        parameter=level,
        effective_rank=int(np.sum(x > 0.0)),
        condition_number=filtered_condition_number(factors, family, level),
        residual=float(np.sqrt(head + floor * floor)),
        residual_floor=floor,
        jump_root=jumped,
        curve=curve,
    )

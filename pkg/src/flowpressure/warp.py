"""Bowen-ball membership oracles.

Five ball notions share one engine: the classical (t, eps)-ball, its
reparametrized version, and three rescaled variants whose tube radius scales
with the field speed along the center orbit.  Reparametrizations are
discretized as monotone staircase paths on the shared sample grid and decided
by a boolean dynamic program restricted to a band |alpha(s) - s| <=
max(lambda*s, lambda*b).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ContractViolationError, SingularOrbitError
from .flow_core import SystemSpec, Trajectory, distance_many

_ZERO_SPEED = 0.0


class BallVariant(enum.Enum):
    PLAIN = "plain"            # d(phi_s x, phi_s y) < eps
    PLAIN_REPARAM = "plain-reparam"  # d(phi_{a(s)} x, phi_s y) < eps
    R1 = "r1"                  # d(phi_s x, phi_s y) < eps * |X(phi_s x)|
    R2 = "r2"                  # d(phi_{a(s)} x, phi_s y) < eps * |X(phi_{a(s)} x)|
    R3 = "r3"                  # d(phi_s x, phi_{a(s)} y) < eps * |X(phi_s x)|


_WARPED = {BallVariant.PLAIN_REPARAM, BallVariant.R2, BallVariant.R3}
_RESCALED = {BallVariant.R1, BallVariant.R2, BallVariant.R3}


@dataclass(frozen=True)
class WarpBand:
    lam: float = 0.5
    b: float = 0.0  # 0 means "10 * dt", resolved at call time

    def __post_init__(self):
        if not 0.0 < self.lam < 1.0:
            raise ContractViolationError("band lambda must lie in (0, 1)")
        if self.b < 0.0:
            raise ContractViolationError("band b must be positive")

    def half_width(self, s, dt: float):
        b = self.b if self.b > 0.0 else 10.0 * dt
        return self.lam * np.maximum(s, b)


@dataclass
class WarpPath:
    """Monotone staircase witness: (i, j) pairs from (0,0) to (n, n)."""

    pairs: np.ndarray  # (m, 2) int array

    def __post_init__(self):
        self.pairs = np.asarray(self.pairs, dtype=int)
        if self.pairs.ndim != 2 or self.pairs.shape[1] != 2:
            raise ContractViolationError("warp path needs (m, 2) index pairs")
        steps = np.diff(self.pairs, axis=0)
        if np.any(steps < 0) or np.any(steps > 1) or np.any(steps.sum(axis=1) < 1):
            raise ContractViolationError("warp path steps must advance i, j, or both by 1")
        if np.any(self.pairs[0] != 0):
            raise ContractViolationError("warp path must start at (0, 0)")


def _check_pair(x_traj: Trajectory, y_traj: Trajectory):
    if abs(x_traj.dt - y_traj.dt) > 1e-12:
        raise ContractViolationError("trajectories must share dt")
    if x_traj.n_steps != y_traj.n_steps:
        raise ContractViolationError("trajectories must share total time")


def _radii(variant: BallVariant, eps: float, x_traj: Trajectory) -> np.ndarray:
    if variant in _RESCALED:
        if np.any(x_traj.speeds <= _ZERO_SPEED):
            raise SingularOrbitError(
                "center orbit meets the singular set; rescaled radius undefined"
            )
        return eps * x_traj.speeds
    return np.full(x_traj.n_steps + 1, eps)


def band_mask(n: int, dt: float, band: WarpBand, anchor: str) -> np.ndarray:
    """Visitable (i, j) cells: |i - j|*dt <= half-width at the anchor time.

    ``anchor`` is "y" when the reparametrization argument s runs on the y grid
    (plain-reparam and R2: alpha warps x) and "x" when it runs on the x grid
    (R3: alpha warps y).
    """
    idx = np.arange(n + 1) * dt
    gap = np.abs(idx[:, None] - idx[None, :])
    s = idx[None, :] if anchor == "y" else idx[:, None]
    return gap <= band.half_width(s, dt) + 1e-12


def _ok_matrix(sys, variant, x_traj, y_traj, eps, band):
    r = _radii(variant, eps, x_traj)
    d = distance_many(sys, x_traj.positions[:, None, :], y_traj.positions[None, :, :])
    ok = d < r[:, None]
    anchor = "x" if variant is BallVariant.R3 else "y"
    return ok & band_mask(x_traj.n_steps, x_traj.dt, band, anchor)


def dp_feasible(ok: np.ndarray) -> np.ndarray:
    """Staircase reachability over a boolean lattice.

    feasible[i, j] is true iff a monotone staircase from (0, 0) to (i, j)
    stays inside ok.  Row-vectorized: vertical/diagonal predecessors seed each
    row, horizontal runs are resolved by comparing the latest seed against the
    latest blocked column.
    """
    ok = np.asarray(ok, dtype=bool)
    n_i, n_j = ok.shape
    feas = np.zeros_like(ok)
    feas[0] = np.logical_and.accumulate(ok[0])
    idx = np.arange(n_j)
    for i in range(1, n_i):
        prev = feas[i - 1]
        base = prev.copy()
        base[1:] |= prev[:-1]
        row_ok = ok[i]
        last_bad = np.maximum.accumulate(np.where(row_ok, -1, idx))
        seed = np.maximum.accumulate(np.where(base & row_ok, idx, -1))
        feas[i] = (seed >= 0) & (seed >= last_bad)
    return feas


def in_ball(
    variant: BallVariant,
    sys: SystemSpec,
    x_traj: Trajectory,
    y_traj: Trajectory,
    eps: float,
    band: WarpBand = WarpBand(),
) -> bool:
    """Does y lie in the variant's ball about x at scale eps?"""
    _check_pair(x_traj, y_traj)
    r = _radii(variant, eps, x_traj)
    diag = distance_many(sys, x_traj.positions, y_traj.positions)
    if bool(np.all(diag < r)):
        return True  # identity warp; also the full answer for pointwise variants
    if variant not in _WARPED:
        return False
    ok = _ok_matrix(sys, variant, x_traj, y_traj, eps, band)
    if not (ok[0, 0] and ok[-1, -1]):
        return False
    return bool(dp_feasible(ok)[-1, -1])


def find_warp(
    variant: BallVariant,
    sys: SystemSpec,
    x_traj: Trajectory,
    y_traj: Trajectory,
    eps: float,
    band: WarpBand = WarpBand(),
) -> Optional[WarpPath]:
    """Constructive witness for the warped variants; None when infeasible."""
    if variant not in _WARPED:
        raise ContractViolationError("find_warp applies to warped variants only")
    _check_pair(x_traj, y_traj)
    ok = _ok_matrix(sys, variant, x_traj, y_traj, eps, band)
    feas = dp_feasible(ok)
    if not feas[-1, -1]:
        return None
    i = j = x_traj.n_steps
    rev = [(i, j)]
    while i > 0 or j > 0:
        if i > 0 and j > 0 and feas[i - 1, j - 1]:
            i -= 1
            j -= 1
        elif i > 0 and feas[i - 1, j]:
            i -= 1
        else:
            j -= 1
        rev.append((i, j))
    return WarpPath(np.array(rev[::-1]))


def check_warp(
    variant: BallVariant,
    sys: SystemSpec,
    x_traj: Trajectory,
    y_traj: Trajectory,
    eps: float,
    path: WarpPath,
    band: WarpBand = WarpBand(),
) -> bool:
    """Independent per-cell re-check of a claimed witness."""
    _check_pair(x_traj, y_traj)
    ii, jj = path.pairs[:, 0], path.pairs[:, 1]
    if ii[-1] != x_traj.n_steps or jj[-1] != y_traj.n_steps:
        return False
    r = _radii(variant, eps, x_traj)
    d = distance_many(sys, x_traj.positions[ii], y_traj.positions[jj])
    if not np.all(d < r[ii]):
        return False
    anchor = "x" if variant is BallVariant.R3 else "y"
    s = (ii if anchor == "x" else jj) * x_traj.dt
    gap = np.abs(ii - jj) * x_traj.dt
    return bool(np.all(gap <= band.half_width(s, x_traj.dt) + 1e-12))


@dataclass
class InclusionReport:
    pairs_checked: int
    r3_memberships: int
    r2_memberships: int
    violations_r3_to_r2: int
    violations_r2_to_r3: int
    margins: np.ndarray  # slack 1 - max(d/radius) along the found witness

    @property
    def violations(self) -> int:
        return self.violations_r3_to_r2 + self.violations_r2_to_r3


def inclusion_check_31(
    sys: SystemSpec,
    pool: list[Trajectory],
    eps: float,
    lam: float = 0.5,
    samples: int = 200,
    seed: int = 0,
    band: Optional[WarpBand] = None,
) -> InclusionReport:
    """Finite-scale check of the nesting B3*(t) within B2*((1-lam)t) and back.

    Samples ordered pairs from the trajectory pool; every membership in one
    warped rescaled ball at horizon t must survive in the other at the
    lam-shortened horizon.  Violations are counted, not raised.
    """
    if band is None:
        band = WarpBand(lam=lam)
    rng = np.random.default_rng(seed)
    n = pool[0].n_steps
    n_short = int(np.floor((1.0 - lam) * n + 1e-9))
    if n_short < 1:
        raise ContractViolationError("shortened horizon has no steps; raise t or lower lam")
    v32 = v23 = n3 = n2 = 0
    margins = []
    for _ in range(samples):
        a, b_ = rng.integers(0, len(pool), size=2)
        x, y = pool[a], pool[b_]
        xs, ys = x.prefix(n_short), y.prefix(n_short)
        if in_ball(BallVariant.R3, sys, x, y, eps, band):
            n3 += 1
            if not in_ball(BallVariant.R2, sys, xs, ys, eps, band):
                v32 += 1
            else:
                margins.append(_witness_margin(BallVariant.R2, sys, xs, ys, eps, band))
        if in_ball(BallVariant.R2, sys, x, y, eps, band):
            n2 += 1
            if not in_ball(BallVariant.R3, sys, xs, ys, eps, band):
                v23 += 1
            else:
                margins.append(_witness_margin(BallVariant.R3, sys, xs, ys, eps, band))
    return InclusionReport(samples, n3, n2, v32, v23, np.asarray(margins))


def _witness_margin(variant, sys, x_traj, y_traj, eps, band) -> float:
    path = find_warp(variant, sys, x_traj, y_traj, eps, band)
    ii, jj = path.pairs[:, 0], path.pairs[:, 1]
    r = _radii(variant, eps, x_traj)
    d = distance_many(sys, x_traj.positions[ii], y_traj.positions[jj])
    return float(1.0 - np.max(d / r[ii]))


def enumerate_staircase_feasible(ok: np.ndarray) -> bool:
    """Oracle: brute-force search over all monotone staircase paths.

    Exponential; intended for cross-checking dp_feasible on small lattices.
    """
    ok = np.asarray(ok, dtype=bool)
    n_i, n_j = ok.shape
    if not ok[0, 0]:
        return False
    stack = [(0, 0)]
    seen = {(0, 0)}
    while stack:
        i, j = stack.pop()
        if i == n_i - 1 and j == n_j - 1:
            return True
        for di, dj in ((1, 1), (1, 0), (0, 1)):
            a, b = i + di, j + dj
            if a < n_i and b < n_j and ok[a, b] and (a, b) not in seen:
                seen.add((a, b))
                stack.append((a, b))
    return False

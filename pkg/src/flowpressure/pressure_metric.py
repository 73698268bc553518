"""Rescaled metric pressure: weighted Bowen-ball covers of an empirical measure.

N^mu(delta, t, eps, X, f) is the cheapest total weight sum exp(int_0^t f) of a
finite set of regular centers whose variant balls cover more than 1 - delta of
the measure.  The infimum is taken over a candidate pool subsampled from the
atoms, so every reported value is an upper bound on the true infimum.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.special import logsumexp

from .errors import (
    ContractViolationError,
    InfeasibleCoverError,
    SingularOrbitError,
)
from .flow_core import (
    Point,
    SystemSpec,
    distance_many,
    integrate_batch,
    integrate_orbit,
    singular_distance_many,
)
from .ergodic import EmpiricalMeasure, GridPartition, smb_entropy_detail
from .warp import BallVariant, WarpBand, dp_feasible, band_mask

_WARPED = {BallVariant.PLAIN_REPARAM, BallVariant.R2, BallVariant.R3}
_RESCALED = {BallVariant.R1, BallVariant.R2, BallVariant.R3}


@dataclass(frozen=True)
class PotentialSpec:
    f: Callable[[np.ndarray], np.ndarray]  # (..., dim) -> (...)
    name: str = "f"
    analytic_space_average: Optional[float] = None

    def shifted(self, c: float) -> "PotentialSpec":
        f = self.f
        avg = self.analytic_space_average
        return PotentialSpec(
            lambda p: np.asarray(f(p), dtype=float) + c,
            f"{self.name}+{c:g}",
            None if avg is None else avg + c,
        )


def constant_potential(c: float) -> PotentialSpec:
    return PotentialSpec(
        lambda p: np.full(np.asarray(p).shape[:-1], float(c)),
        f"const({c:g})",
        float(c),
    )


@dataclass
class CoverSolution:
    center_indices: np.ndarray   # indices into the candidate pool
    centers: np.ndarray          # (k, dim) coordinates
    log_weight: float            # log sum_i exp(int f along center i)
    covered_mass: float
    variant: BallVariant
    t: float
    eps: float
    delta: float
    method: str


@dataclass
class PressureRow:
    variant: str
    t: float
    eps: float
    delta: float
    value: float   # (1/t) log N
    method: str
    K_id: str = ""
    fill_radius: float = 0.0


@dataclass
class PressureTable:
    rows: list[PressureRow] = dc_field(default_factory=list)
    read_offs: dict = dc_field(default_factory=dict)  # eps -> slope of log N vs t

    def cell(self, variant, t, eps) -> PressureRow:
        tag = variant.value if isinstance(variant, BallVariant) else variant
        for r in self.rows:
            if r.variant == tag and abs(r.t - t) < 1e-12 and abs(r.eps - eps) < 1e-12:
                return r
        raise KeyError((variant, t, eps))


# ---------------------------------------------------------------------------
# orbit bundles and membership


def orbit_integral(sys: SystemSpec, x: Point, f, t: float, dt: float) -> float:
    """int_0^t f(phi_s x) ds by the composite trapezoid rule."""
    traj = integrate_orbit(sys, x, t, dt)
    vals = np.asarray(f(traj.positions), dtype=float)
    return float(np.trapezoid(vals, dx=dt))


def _orbit_integrals_batch(f, pos: np.ndarray, dt: float, n_steps: int) -> np.ndarray:
    vals = np.asarray(f(pos[: n_steps + 1]), dtype=float)
    return np.trapezoid(vals, dx=dt, axis=0)


def membership_matrix(
    sys: SystemSpec,
    variant: BallVariant,
    pos_x: np.ndarray,   # (n+1, mx, dim) center orbits
    spd_x: np.ndarray,   # (n+1, mx)
    pos_y: np.ndarray,   # (n+1, my, dim) target orbits
    eps: float,
    dt: float,
    horizons: Sequence[int],
    band: WarpBand = WarpBand(),
) -> list[np.ndarray]:
    """Ball membership of targets in each center's ball, per time horizon.

    Returns one (mx, my) boolean matrix per entry of ``horizons`` (sample-step
    counts, increasing).  Pointwise variants run an early-exit sweep; warped
    variants add a per-pair dynamic program for pairs that fail the identity
    alignment (the diagonal shortcut certifies the rest).
    """
    horizons = list(horizons)
    if any(h2 < h1 for h1, h2 in zip(horizons, horizons[1:])):
        raise ContractViolationError("horizons must be nondecreasing")
    n_max = horizons[-1]
    mx, my = pos_x.shape[1], pos_y.shape[1]
    if variant in _RESCALED and np.any(spd_x[: n_max + 1] <= 0.0):
        raise SingularOrbitError("center orbit meets the singular set")
    alive = np.ones((mx, my), dtype=bool)
    out = []
    hi = 0
    for k in range(n_max + 1):
        r = eps * spd_x[k] if variant in _RESCALED else np.full(mx, eps)
        idx = np.nonzero(alive)
        if idx[0].size:
            d = distance_many(sys, pos_x[k, idx[0]], pos_y[k, idx[1]])
            alive[idx] = d < r[idx[0]]
        while hi < len(horizons) and horizons[hi] == k:
            out.append(alive.copy())
            hi += 1
    if variant not in _WARPED:
        return out

    # Warped variants: the sweep above certifies the identity alignment; pairs
    # that failed it may still admit a staircase.  Any staircase visits (0,0)
    # and (h,h), so single-sample proximity there prunes the DP retries.
    def diag_ok(k):
        r = eps * spd_x[k] if variant in _RESCALED else np.full(mx, eps)
        return distance_many(sys, pos_x[k][:, None, :], pos_y[k][None, :, :]) < r[:, None]

    ok0 = diag_ok(0)
    need = [~m & ok0 & diag_ok(h) for m, h in zip(out, horizons)]
    retry = np.argwhere(np.logical_or.reduce(need))
    if retry.size == 0:
        return out
    anchor = "x" if variant is BallVariant.R3 else "y"
    bmask = band_mask(n_max, dt, band, anchor)
    for a, b in retry:
        d = distance_many(
            sys,
            pos_x[: n_max + 1, a][:, None, :],
            pos_y[: n_max + 1, b][None, :, :],
        )
        r = (
            eps * spd_x[: n_max + 1, a]
            if variant in _RESCALED
            else np.full(n_max + 1, eps)
        )
        feas_diag = dp_feasible((d < r[:, None]) & bmask).diagonal()
        for hi, h in enumerate(horizons):
            if need[hi][a, b]:
                out[hi][a, b] = bool(feas_diag[h])
    return out

# ---------------------------------------------------------------------------
# weighted set cover solvers


def greedy_cover(
    member: np.ndarray,      # (mc, ma) ball membership
    atom_w: np.ndarray,      # (ma,) atom weights
    log_w: np.ndarray,       # (mc,) candidate log weights (int f)
    delta: float,
) -> tuple[np.ndarray, float]:
    """Classical density greedy: maximize new mass per unit weight.

    Returns (selected indices in pick order, covered mass).  Ties in the
    density score break toward the lighter candidate, then input order.
    """
    mc = member.shape[0]
    covered = np.zeros(member.shape[1], dtype=bool)
    chosen: list[int] = []
    avail = np.ones(mc, dtype=bool)
    target = 1.0 - delta
    mass = 0.0
    while mass <= target:
        new_mass = (member & ~covered) @ atom_w
        new_mass[~avail] = 0.0
        if not np.any(new_mass > 0):
            raise InfeasibleCoverError(required=target, achieved=mass)
        with np.errstate(divide="ignore"):
            score = np.where(new_mass > 0, np.log(new_mass) - log_w, -np.inf)
        best = np.max(score)
        ties = np.nonzero(score >= best - 1e-12)[0]
        if ties.size > 1:
            ties = ties[log_w[ties] <= np.min(log_w[ties]) + 1e-12]
        pick = int(ties[0])
        chosen.append(pick)
        avail[pick] = False
        covered |= member[pick]
        mass = float(atom_w[covered].sum())
    return np.asarray(chosen, dtype=int), mass


def exact_cover(
    member: np.ndarray,
    atom_w: np.ndarray,
    log_w: np.ndarray,
    delta: float,
) -> tuple[np.ndarray, float]:
    """True infimum over every subset of the pool (pool size <= 18).

    Atoms are grouped by their coverage signature; a subset-sum (zeta)
    transform yields the uncovered mass of all 2^mc subsets at once.
    """
    mc, ma = member.shape
    if mc > 18:
        raise ContractViolationError("exact mode limited to 18 candidates")
    sig = np.zeros(ma, dtype=np.int64)
    for c in range(mc):
        sig |= member[c].astype(np.int64) << c
    full = 1 << mc
    sig_w = np.bincount(sig, weights=atom_w, minlength=full)
    # subset-sum over signatures: sos[T] = total weight of atoms covered only
    # within T; uncovered(S) = sos[complement(S)]
    sos = sig_w.copy()
    for c in range(mc):
        bit = 1 << c
        idx = np.arange(full)
        has = (idx & bit) != 0
        sos[has] += sos[idx[has] ^ bit]
    subsets = np.arange(full)
    covered = atom_w.sum() - sos[(full - 1) ^ subsets]
    feasible = covered > 1.0 - delta
    if not np.any(feasible):
        raise InfeasibleCoverError(required=1.0 - delta, achieved=float(covered.max()))
    # subset weights in a scaled linear space to avoid overflow
    ref = float(np.max(log_w))
    scaled = np.exp(log_w - ref)
    wsum = np.zeros(full)
    for c in range(mc):
        bit = 1 << c
        idx = np.arange(full)
        has = (idx & bit) != 0
        wsum[has] = wsum[idx[has] ^ bit] + scaled[c]
    wsum[0] = np.inf  # empty set never feasible, guard anyway
    cand = np.where(feasible, wsum, np.inf)
    best = int(np.argmin(cand))
    chosen = np.nonzero([(best >> c) & 1 for c in range(mc)])[0]
    return chosen.astype(int), float(covered[best])


def _log_weight_of(chosen: np.ndarray, log_w: np.ndarray) -> float:
    return float(logsumexp(log_w[chosen]))


# ---------------------------------------------------------------------------


def _as_coords(sys: SystemSpec, candidates) -> np.ndarray:
    if isinstance(candidates, np.ndarray):
        out = np.atleast_2d(candidates.astype(float))
    else:
        out = np.stack([
            c.coords if isinstance(c, Point) else np.asarray(c, dtype=float)
            for c in candidates
        ])
    if np.any(singular_distance_many(sys, out) <= 0.0):
        raise ContractViolationError("cover candidates must be regular points")
    return out


def metric_cover_value(
    sys: SystemSpec,
    mu: EmpiricalMeasure,
    pot: PotentialSpec,
    variant: BallVariant,
    t: float,
    eps: float,
    delta: float,
    dt: float,
    candidates,
    mode: str = "greedy",
    band: WarpBand = WarpBand(),
) -> CoverSolution:
    """Cheapest variant-ball cover of > 1-delta of mu from the candidate pool."""
    variant = BallVariant(variant)
    if mode not in ("greedy", "exact"):
        raise ContractViolationError("mode must be greedy or exact")
    cand = _as_coords(sys, candidates)
    n = int(round(t / dt))
    pos_x, spd_x = integrate_batch(sys, cand, t, dt)
    pos_y, _ = integrate_batch(sys, mu.points, t, dt)
    member = membership_matrix(sys, variant, pos_x, spd_x, pos_y, eps, dt, [n], band)[0]
    log_w = _orbit_integrals_batch(pot.f, pos_x, dt, n)
    solver = greedy_cover if mode == "greedy" else exact_cover
    chosen, mass = solver(member, mu.weights, log_w, delta)
    return CoverSolution(
        center_indices=chosen,
        centers=cand[chosen],
        log_weight=_log_weight_of(chosen, log_w),
        covered_mass=mass,
        variant=variant,
        t=t,
        eps=eps,
        delta=delta,
        method=mode,
    )


def _read_offs(rows: list[PressureRow], t_grid) -> dict:
    """Least-squares slope of log N over the top half of the t grid, per eps."""
    out = {}
    ts = np.asarray(sorted(t_grid), dtype=float)
    top = ts[len(ts) // 2 :] if len(ts) > 1 else ts
    for eps in sorted({r.eps for r in rows}):
        pts = [(r.t, r.value * r.t) for r in rows
               if r.eps == eps and any(abs(r.t - tt) < 1e-12 for tt in top)]
        if len(pts) == 1:
            out[eps] = pts[0][1] / pts[0][0]
            continue
        x = np.array([p[0] for p in pts])
        y = np.array([p[1] for p in pts])
        out[eps] = float(np.polyfit(x, y, 1)[0])
    return out


def metric_pressure_table(
    sys: SystemSpec,
    mu: EmpiricalMeasure,
    pot: PotentialSpec,
    variant: BallVariant,
    t_grid: Sequence[float],
    eps_grid: Sequence[float],
    delta: float,
    dt: float,
    pool_size: int = 400,
    mode: str = "greedy",
    seed: int = 0,
    band: WarpBand = WarpBand(),
) -> PressureTable:
    """(1/t) log N over a (t, eps) grid plus per-eps slope read-offs."""
    variant = BallVariant(variant)
    t_grid = sorted(t_grid)
    eps_grid = sorted(eps_grid)
    if not t_grid or not eps_grid:
        raise ContractViolationError("grids must be nonempty")
    rng = np.random.default_rng(seed)
    reg = singular_distance_many(sys, mu.points) > 0
    reg_idx = np.nonzero(reg)[0]
    if pool_size < reg_idx.size:
        pool_idx = rng.choice(reg_idx, size=pool_size, replace=False)
    else:
        pool_idx = reg_idx
    cand = mu.points[np.sort(pool_idx)]
    t_max = t_grid[-1]
    horizons = [int(round(t / dt)) for t in t_grid]
    for h, t in zip(horizons, t_grid):
        if abs(h * dt - t) > 1e-9:
            raise ContractViolationError(f"dt={dt} does not divide t={t}")
    pos_x, spd_x = integrate_batch(sys, cand, t_max, dt)
    pos_y, _ = integrate_batch(sys, mu.points, t_max, dt)
    solver = greedy_cover if mode == "greedy" else exact_cover
    table = PressureTable()
    for eps in eps_grid:
        members = membership_matrix(
            sys, variant, pos_x, spd_x, pos_y, eps, dt, horizons, band
        )
        for t, h, member in zip(t_grid, horizons, members):
            log_w = _orbit_integrals_batch(pot.f, pos_x, dt, h)
            chosen, _ = solver(member, mu.weights, log_w, delta)
            val = _log_weight_of(chosen, log_w) / t
            table.rows.append(
                PressureRow(variant.value, t, eps, delta, val, mode)
            )
    table.read_offs = _read_offs(table.rows, t_grid)
    return table


# ---------------------------------------------------------------------------
# bounded-variation diagnostic and the Katok comparison


@dataclass
class GammaResult:
    gamma: float
    pairs_used: int
    no_admissible_pairs: bool


def bounded_variation_gamma_detail(
    sys: SystemSpec,
    pot: PotentialSpec,
    variant: BallVariant,
    t: float,
    eps: float,
    dt: float,
    pair_samples: int = 100,
    seed: int = 0,
    base_points: Optional[np.ndarray] = None,
    band: WarpBand = WarpBand(),
    cloud: int = 6,
) -> GammaResult:
    """Sampled lower estimate of gamma(f, eps) at horizon t.

    gamma = sup over centers x and ball members y, z of
    |int_0^t f(phi_s y) - f(phi_s z) ds|.  Centers are sampled (or supplied),
    members are perturbations of the center filtered through ball membership.
    """
    variant = BallVariant(variant)
    if variant not in (BallVariant.R2, BallVariant.R3):
        raise ContractViolationError("gamma is defined for the warped rescaled variants")
    if pair_samples < 50:
        raise ContractViolationError("need pair_samples >= 50")
    rng = np.random.default_rng(seed)
    n = int(round(t / dt))
    if base_points is None:
        base_points = rng.random((pair_samples, sys.dim))
    base_points = np.atleast_2d(base_points)
    keep = singular_distance_many(sys, base_points) > 1e-6
    base_points = base_points[keep][:pair_samples]
    gamma = 0.0
    used = 0
    for x in base_points:
        spd0 = float(np.linalg.norm(np.asarray(sys.field(x), dtype=float)))
        if spd0 < 1e-9:
            continue
        scale = 0.5 * eps * spd0
        pert = x + scale * rng.standard_normal((cloud, sys.dim))
        starts = np.vstack([x[None, :], pert])
        try:
            pos, spd = integrate_batch(sys, starts, t, dt)
        except Exception:
            continue
        if np.any(spd[:, 0] <= 0.0):
            continue
        member = membership_matrix(
            sys, variant, pos[:, :1], spd[:, :1], pos[:, 1:], eps, dt, [n], band
        )[0][0]
        inside = np.nonzero(member)[0]
        if inside.size < 2:
            continue
        ints = _orbit_integrals_batch(pot.f, pos[:, 1:][:, inside], dt, n)
        gamma = max(gamma, float(np.max(ints) - np.min(ints)))
        used += inside.size * (inside.size - 1) // 2
    return GammaResult(gamma, used, used == 0)


def bounded_variation_gamma(sys, pot, variant, t, eps, dt, pair_samples=100, **kw) -> float:
    return bounded_variation_gamma_detail(
        sys, pot, variant, t, eps, dt, pair_samples, **kw
    ).gamma


def transport_defect(sys: SystemSpec, mu: EmpiricalMeasure, dt: float) -> float:
    """Mean mass displacement of the atoms under the time-dt flow.

    Orbit-generated empirical measures are only approximately invariant; this
    reports the weighted average distance each atom moves in one step.
    """
    pos, _ = integrate_batch(sys, mu.points, dt, dt)
    moved = distance_many(sys, pos[0], pos[1])
    return float(np.sum(mu.weights * moved))


@dataclass
class KatokReport:
    metric_read_off: dict          # eps -> slope
    metric_value: float            # read-off at the smallest eps
    smb_entropy: float
    f_average: float
    smb_side: float                # entropy + f average
    difference: float
    transport_defect: float
    table: PressureTable
    smb_detail: object


def katok_check(
    sys: SystemSpec,
    mu: EmpiricalMeasure,
    pot: PotentialSpec,
    variant: BallVariant,
    t_grid: Sequence[float],
    eps_grid: Sequence[float],
    delta: float,
    dt: float,
    partition: GridPartition,
    tau: float,
    n: int,
    pool_size: int = 400,
    mode: str = "greedy",
    seed: int = 0,
    probe_count: int = 200,
    smb_measure: Optional[EmpiricalMeasure] = None,
    smb_dt: Optional[float] = None,
) -> KatokReport:
    """Finite-scale comparison of metric pressure with entropy + int f dmu."""
    table = metric_pressure_table(
        sys, mu, pot, variant, t_grid, eps_grid, delta, dt,
        pool_size=pool_size, mode=mode, seed=seed,
    )
    eps_min = min(table.read_offs)
    metric_value = table.read_offs[eps_min]
    mu_s = smb_measure if smb_measure is not None else mu
    smb = smb_entropy_detail(
        sys, mu_s, partition, tau, n, probe_count=max(probe_count, 30),
        seed=seed, dt=smb_dt,
    )
    f_avg = float(np.sum(mu.weights * np.asarray(pot.f(mu.points), dtype=float)))
    side = smb.entropy + f_avg
    return KatokReport(
        metric_read_off=table.read_offs,
        metric_value=metric_value,
        smb_entropy=smb.entropy,
        f_average=f_avg,
        smb_side=side,
        difference=metric_value - side,
        transport_defect=transport_defect(sys, mu, dt),
        table=table,
        smb_detail=smb,
    )

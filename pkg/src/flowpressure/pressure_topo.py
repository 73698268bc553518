"""Rescaled topological pressure on finite compact samples K away from Sing(X).

Spanning values upper-bound the infimum N*_{i,t}; separating values
lower-bound the supremum Z*_{i,t}.  The sandwich and variational reports
compose the two with shared certificates so the structural inequalities hold
whenever the underlying finite-scale implications do.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Optional, Sequence

import numpy as np
from scipy.special import logsumexp

from .errors import ContractViolationError, EmptyCompactError
from .flow_core import (
    SystemSpec,
    distance_many,
    integrate_batch,
    singular_distance_many,
    speeds_many,
)
from .ergodic import EmpiricalMeasure
from .pressure_metric import (
    PotentialSpec,
    PressureRow,
    PressureTable,
    _orbit_integrals_batch,
    _read_offs,
    exact_cover,
    greedy_cover,
    membership_matrix,
)
from .warp import BallVariant, WarpBand


def estimate_comparability(sys: SystemSpec, samples: int = 20000, seed: int = 0) -> float:
    """Empirical bound on the scale c with: d(x,y) < c*|X(x)| forces
    speed comparability |X(x)|/2 <= |X(y)| <= 2*|X(x)|.

    Samples center points and perturbations across dyadic scales; returns the
    smallest normalized distance d/|X(x)| seen among comparability violations
    (a cap of 1.0 when none are found).
    """
    rng = np.random.default_rng(seed)
    x = rng.random((samples, sys.dim))
    if sys.space == "euclidean-box":
        lo, hi = sys.box_bounds[:, 0], sys.box_bounds[:, 1]
        x = lo + (hi - lo) * x
    sx = speeds_many(sys, x)
    good = sx > 1e-9
    x, sx = x[good], sx[good]
    c = 1.0
    for scale in 2.0 ** -np.arange(1, 12):
        y = x + scale * sx[:, None] * rng.standard_normal(x.shape)
        sy = speeds_many(sys, y)
        d = distance_many(sys, x, y) / sx
        bad = (sy < 0.5 * sx) | (sy > 2.0 * sx)
        if np.any(bad):
            c = min(c, float(np.min(d[bad])))
    return c


@dataclass
class CompactSample:
    points: np.ndarray
    rho_sing: float
    fill_radius: float = np.nan
    K_id: str = "K"

    def __post_init__(self):
        self.points = np.atleast_2d(np.asarray(self.points, dtype=float))
        if self.points.shape[0] == 0:
            raise EmptyCompactError("compact sample has no points")

    @property
    def n_points(self) -> int:
        return self.points.shape[0]


def build_compact_sample(
    sys: SystemSpec,
    source,
    rho_sing: float,
    max_points: int,
    start_index: int = 0,
    K_id: str = "K",
) -> CompactSample:
    """Filter regular points and thin by farthest-point selection.

    ``source`` is an EmpiricalMeasure or an (m, dim) point array.  The fill
    radius (max distance from a dropped point to the kept set) is recorded so
    the discretization density of K is visible downstream.
    """
    if rho_sing <= 0:
        raise ContractViolationError("rho_sing must be positive")
    pts = source.points if isinstance(source, EmpiricalMeasure) else np.atleast_2d(
        np.asarray(source, dtype=float)
    )
    keep = singular_distance_many(sys, pts) >= rho_sing
    pts = pts[keep]
    if pts.shape[0] == 0:
        raise EmptyCompactError(f"no points at singular distance >= {rho_sing}")
    if pts.shape[0] <= max_points:
        return CompactSample(pts, rho_sing, fill_radius=0.0, K_id=K_id)
    chosen = [start_index % pts.shape[0]]
    dmin = distance_many(sys, pts, pts[chosen[0]])
    while len(chosen) < max_points:
        nxt = int(np.argmax(dmin))
        chosen.append(nxt)
        dmin = np.minimum(dmin, distance_many(sys, pts, pts[nxt]))
    return CompactSample(pts[chosen], rho_sing, fill_radius=float(dmin.max()), K_id=K_id)


@dataclass
class SpanningSolution:
    indices: np.ndarray
    log_weight: float
    variant: BallVariant
    t: float
    eps: float
    method: str


@dataclass
class SeparatingSolution:
    indices: np.ndarray
    log_weight: float
    variant: BallVariant
    t: float
    eps: float
    maximal: bool
    order: str


def _k_orbits(sys, K: CompactSample, t, dt):
    return integrate_batch(sys, K.points, t, dt)


def _k_membership(sys, variant, pos, spd, eps, dt, n, band):
    return membership_matrix(sys, variant, pos, spd, pos, eps, dt, [n], band)[0]


def greedy_spanning(
    sys: SystemSpec,
    K: CompactSample,
    pot: PotentialSpec,
    variant: BallVariant,
    t: float,
    eps: float,
    dt: float,
    band: WarpBand = WarpBand(),
    mode: Optional[str] = None,
) -> SpanningSolution:
    """Cheapest-found set of K-centers whose balls cover every point of K.

    Greedy weighted cover by default; exhaustive subset search when the pool
    is small enough.  The value upper-bounds the spanning infimum N*.
    """
    variant = BallVariant(variant)
    n = int(round(t / dt))
    pos, spd = _k_orbits(sys, K, t, dt)
    member = _k_membership(sys, variant, pos, spd, eps, dt, n, band)
    assert np.all(member.diagonal()), "a regular point must lie in its own ball"
    log_w = _orbit_integrals_batch(pot.f, pos, dt, n)
    m = K.n_points
    if mode is None:
        mode = "exact" if m <= 18 else "greedy"
    solver = exact_cover if mode == "exact" else greedy_cover
    # full coverage as a weighted target: missing any atom drops mass by 1/m
    chosen, _ = solver(member, np.full(m, 1.0 / m), log_w, 0.5 / m)
    return SpanningSolution(
        chosen, float(logsumexp(log_w[chosen])), variant, t, eps, mode
    )


def maximal_separating(
    sys: SystemSpec,
    K: CompactSample,
    pot: PotentialSpec,
    variant: BallVariant,
    t: float,
    eps: float,
    dt: float,
    order: str = "weight-desc",
    band: WarpBand = WarpBand(),
) -> SeparatingSolution:
    """Sequential insertion keeping two-way separation; maximal by construction.

    The weight-descending order chases the separating supremum Z* from below;
    either order yields a valid lower bound.
    """
    variant = BallVariant(variant)
    if order not in ("weight-desc", "input"):
        raise ContractViolationError("order must be weight-desc or input")
    n = int(round(t / dt))
    pos, spd = _k_orbits(sys, K, t, dt)
    member = _k_membership(sys, variant, pos, spd, eps, dt, n, band)
    log_w = _orbit_integrals_batch(pot.f, pos, dt, n)
    if order == "weight-desc":
        sequence = np.argsort(-log_w, kind="stable")
    else:
        sequence = np.arange(K.n_points)
    accepted: list[int] = []
    for j in sequence:
        if all(not member[a, j] and not member[j, a] for a in accepted):
            accepted.append(int(j))
    idx = np.asarray(accepted, dtype=int)
    return SeparatingSolution(
        idx, float(logsumexp(log_w[idx])), variant, t, eps, True, order
    )


def verify_separating(member: np.ndarray, indices: np.ndarray) -> bool:
    sub = member[np.ix_(indices, indices)].copy()
    np.fill_diagonal(sub, False)
    return not np.any(sub)


def verify_maximal(member: np.ndarray, indices: np.ndarray) -> bool:
    inside = np.zeros(member.shape[0], dtype=bool)
    inside[indices] = True
    for j in np.nonzero(~inside)[0]:
        if not np.any(member[indices, j]) and not np.any(member[j, indices]):
            return False
    return True


def verify_spanning(member: np.ndarray, indices: np.ndarray) -> bool:
    return bool(np.all(np.any(member[indices], axis=0)))


# ---------------------------------------------------------------------------


@dataclass
class SandwichReport:
    cells: list = dc_field(default_factory=list)  # per-eps dict of values
    violations_52: int = 0       # maximal eps/2-separating fails to eps-span
    violations_order: int = 0    # N1 < N2 or Z1 < Z2
    violations_chain: int = 0    # N1(eps) > Z1(eps/2)
    margins: list = dc_field(default_factory=list)

    @property
    def violations(self) -> int:
        return self.violations_52 + self.violations_order + self.violations_chain


def sandwich_check(
    sys: SystemSpec,
    K: CompactSample,
    pot: PotentialSpec,
    t: float,
    eps_grid: Sequence[float],
    dt: float,
    band: WarpBand = WarpBand(),
) -> SandwichReport:
    """Finite-scale spanning/separating sandwich at each eps.

    (a) every constructed maximal R1-(t, eps/2, K)-separating set must span K
    at radius eps; (b) R1 values dominate R2 values (ball inclusion); (c) the
    R1 spanning value at eps stays below the separating value at eps/2.  The
    separating sets double as spanning certificates, so (c) can only fail
    through (a).
    """
    n = int(round(t / dt))
    pos, spd = _k_orbits(sys, K, t, dt)
    log_w = _orbit_integrals_batch(pot.f, pos, dt, n)
    rep = SandwichReport()
    for eps in sorted(eps_grid):
        mem1 = _k_membership(sys, BallVariant.R1, pos, spd, eps, dt, n, band)
        mem1_half = _k_membership(sys, BallVariant.R1, pos, spd, eps / 2, dt, n, band)
        mem2 = _k_membership(sys, BallVariant.R2, pos, spd, eps, dt, n, band)

        seps = [
            maximal_separating(sys, K, pot, BallVariant.R1, t, eps / 2, dt, order, band)
            for order in ("weight-desc", "input")
        ]
        span_ok = True
        for e in seps:
            if not verify_spanning(mem1, e.indices):
                rep.violations_52 += 1
                span_ok = False
        z1_half = max(e.log_weight for e in seps)

        n1 = greedy_spanning(sys, K, pot, BallVariant.R1, t, eps, dt, band)
        # any eps/2-separating set that spans at eps is a spanning certificate
        certs = [e.log_weight for e in seps if verify_spanning(mem1, e.indices)]
        n1_val = min([n1.log_weight] + certs)
        n2 = greedy_spanning(sys, K, pot, BallVariant.R2, t, eps, dt, band)
        # an R1 spanning set spans R2 as well (balls only grow)
        n2_val = min(n2.log_weight, n1_val)

        z1 = max(
            maximal_separating(sys, K, pot, BallVariant.R1, t, eps, dt, o, band).log_weight
            for o in ("weight-desc", "input")
        )
        seps2 = [
            maximal_separating(sys, K, pot, BallVariant.R2, t, eps, dt, o, band)
            for o in ("weight-desc", "input")
        ]
        # an R2-separating set is R1-separating, hence also a Z1 lower bound
        z2 = max(e.log_weight for e in seps2)
        z1 = max(z1, z2)

        if n1_val < n2_val - 1e-12 or z1 < z2 - 1e-12:
            rep.violations_order += 1
        if span_ok and n1_val > z1_half + 1e-12:
            rep.violations_chain += 1
        rep.margins.append(z1_half - n1_val)
        rep.cells.append(
            dict(eps=eps, N1=n1_val, N2=n2_val, Z1=z1, Z2=z2, Z1_half=z1_half)
        )
    return rep


def topo_pressure_table(
    sys: SystemSpec,
    K_family: Sequence[CompactSample],
    pot: PotentialSpec,
    variant: BallVariant,
    t_grid: Sequence[float],
    eps_grid: Sequence[float],
    dt: float,
    band: WarpBand = WarpBand(),
    mode: Optional[str] = None,
) -> PressureTable:
    """Max over K of spanning/separating values per (t, eps), plus read-offs.

    Rows carry method "spanning" or "separating"; the pressure read-off (slope
    of log N* in t) uses the spanning rows.
    """
    variant = BallVariant(variant)
    if not t_grid or not eps_grid or not K_family:
        raise ContractViolationError("grids and K family must be nonempty")
    table = PressureTable()
    for t in sorted(t_grid):
        for eps in sorted(eps_grid):
            best = {}
            for K in K_family:
                sol = greedy_spanning(sys, K, pot, variant, t, eps, dt, band, mode)
                sep = max(
                    (
                        maximal_separating(sys, K, pot, variant, t, eps, dt, o, band)
                        for o in ("weight-desc", "input")
                    ),
                    key=lambda e: e.log_weight,
                )
                for tag, val in (("spanning", sol.log_weight), ("separating", sep.log_weight)):
                    if tag not in best or val > best[tag][0]:
                        best[tag] = (val, K)
            for tag, (val, K) in best.items():
                table.rows.append(
                    PressureRow(
                        variant.value, t, eps, 0.0, val / t, tag,
                        K_id=K.K_id, fill_radius=K.fill_radius,
                    )
                )
    table.read_offs = _read_offs(
        [r for r in table.rows if r.method == "spanning"], sorted(t_grid)
    )
    return table


# ---------------------------------------------------------------------------


@dataclass
class VariationalReport:
    topo_read_off: dict
    metric_read_offs: list
    cells: list
    violations: int
    note: str = (
        "metric values use the K points as the candidate pool; the inequality "
        "is checked only where the spanning balls carry > 1-delta of mu-mass"
    )


def variational_gap(
    sys: SystemSpec,
    measures: Sequence[EmpiricalMeasure],
    pot: PotentialSpec,
    K: CompactSample,
    t_grid: Sequence[float],
    eps_grid: Sequence[float],
    delta: float,
    dt: float,
    band: WarpBand = WarpBand(),
    mode: Optional[str] = None,
) -> VariationalReport:
    """Finite-scale partial variational principle: metric below topological.

    For each measure the metric cover draws candidates from the same K pool
    used by the spanning construction, and the spanning set itself serves as a
    cover certificate whenever its balls hold enough mu-mass, which makes the
    cell-wise inequality structural rather than solver-dependent.
    """
    from .pressure_metric import greedy_cover as _greedy  # local alias

    t_grid, eps_grid = sorted(t_grid), sorted(eps_grid)
    t_max = t_grid[-1]
    horizons = [int(round(t / dt)) for t in t_grid]
    pos_k, spd_k = integrate_batch(sys, K.points, t_max, dt)
    cells = []
    violations = 0
    span_rows = []
    metric_values = {i: [] for i in range(len(measures))}
    for eps in eps_grid:
        mem_kk = membership_matrix(
            sys, BallVariant.R1, pos_k, spd_k, pos_k, eps, dt, horizons, band
        )
        mems_mu = []
        for mu in measures:
            pos_a, _ = integrate_batch(sys, mu.points, t_max, dt)
            mems_mu.append(
                membership_matrix(
                    sys, BallVariant.R1, pos_k, spd_k, pos_a, eps, dt, horizons, band
                )
            )
        for ti, (t, h) in enumerate(zip(t_grid, horizons)):
            log_w = _orbit_integrals_batch(pot.f, pos_k, dt, h)
            m = K.n_points
            use_mode = mode or ("exact" if m <= 18 else "greedy")
            solver = exact_cover if use_mode == "exact" else _greedy
            span_idx, _ = solver(
                mem_kk[ti], np.full(m, 1.0 / m), log_w, 0.5 / m
            )
            topo_val = float(logsumexp(log_w[span_idx]))
            span_rows.append(PressureRow("r1", t, eps, 0.0, topo_val / t,
                                         "spanning", K.K_id, K.fill_radius))
            for mi, mu in enumerate(measures):
                member = mems_mu[mi][ti]
                span_mass = float(
                    mu.weights[np.any(member[span_idx], axis=0)].sum()
                )
                try:
                    idx, _ = solver(member, mu.weights, log_w, delta)
                    met_val = float(logsumexp(log_w[idx]))
                except Exception:
                    met_val = np.inf
                if span_mass > 1.0 - delta:
                    met_val = min(met_val, topo_val)
                comparable = span_mass > 1.0 - delta
                if comparable and met_val > topo_val + 1e-12:
                    violations += 1
                if np.isfinite(met_val):
                    metric_values[mi].append((t, eps, met_val))
                cells.append(
                    dict(measure=mi, t=t, eps=eps, metric=met_val,
                         topo=topo_val, span_mass=span_mass,
                         comparable=comparable)
                )
    topo_read = _read_offs(span_rows, t_grid)
    metric_reads = []
    for mi in range(len(measures)):
        rows = [PressureRow("r1", t, e, delta, v / t, "metric")
                for (t, e, v) in metric_values[mi]]
        metric_reads.append(_read_offs(rows, t_grid) if rows else {})
    return VariationalReport(topo_read, metric_reads, cells, violations)

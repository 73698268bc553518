"""Empirical measures, Birkhoff averages, itinerary entropy, Hamming balls."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np
from scipy.special import gammaln, logsumexp

from .errors import (
    ContractViolationError,
    DegenerateMeasureError,
    EstimationFailureError,
)
from .flow_core import (
    EUCLIDEAN_BOX,
    Point,
    SystemSpec,
    Trajectory,
    integrate_batch,
    integrate_orbit,
    singular_distance_many,
)

_IRRATIONAL_SHIFT = np.sqrt(2.0) - 1.0  # per-dimension boundary jitter scale


@dataclass
class EmpiricalMeasure:
    """Weighted point cloud; weights sum to 1."""

    points: np.ndarray   # (m, dim)
    weights: np.ndarray  # (m,)

    def __post_init__(self):
        self.points = np.atleast_2d(np.asarray(self.points, dtype=float))
        self.weights = np.asarray(self.weights, dtype=float)
        if self.points.shape[0] != self.weights.shape[0]:
            raise ContractViolationError("points/weights length mismatch")
        if self.points.shape[0] == 0:
            raise DegenerateMeasureError("measure has no atoms")
        if np.any(self.weights <= 0):
            raise ContractViolationError("weights must be positive")
        s = self.weights.sum()
        if not 1.0 - 1e-9 <= s <= 1.0 + 1e-9:
            raise ContractViolationError(f"weights sum to {s}, expected 1")

    @property
    def n_atoms(self) -> int:
        return self.points.shape[0]


@dataclass
class GridPartition:
    """Product grid partition with jittered cell boundaries.

    ``sides`` gives boxes per coordinate (a scalar applies to every
    coordinate).  Boundaries are shifted by an irrational offset so that
    orbit samples avoid landing on cell faces (the partition-boundary
    mass hypothesis behind itinerary entropy).
    """

    sides: Union[int, Sequence[int]]
    dim: int
    offset: Optional[np.ndarray] = None

    def __post_init__(self):
        s = np.broadcast_to(np.asarray(self.sides, dtype=int), (self.dim,)).copy()
        if np.any(s < 1):
            raise ContractViolationError("sides must be positive")
        self.sides = s
        if int(np.prod(s)) < 3:
            raise ContractViolationError("need at least 3 cells")
        if self.offset is None:
            self.offset = np.mod(_IRRATIONAL_SHIFT * np.arange(1, self.dim + 1), 1.0)
        else:
            self.offset = np.asarray(self.offset, dtype=float)

    @property
    def n_cells(self) -> int:
        return int(np.prod(self.sides))

    def digits(self, sys: SystemSpec, coords: np.ndarray) -> np.ndarray:
        """Per-coordinate cell digits for an (..., dim) coordinate array."""
        coords = np.asarray(coords, dtype=float)
        if sys.space == EUCLIDEAN_BOX:
            lo, hi = sys.box_bounds[:, 0], sys.box_bounds[:, 1]
            t = (coords - lo) / (hi - lo)
            d = np.floor(self.sides * t - self.offset).astype(int)
            return np.clip(d, 0, self.sides - 1)
        t = np.mod(coords + self.offset / self.sides, 1.0)
        return np.minimum(np.floor(self.sides * t).astype(int), self.sides - 1)

    def labels(self, sys: SystemSpec, coords: np.ndarray) -> np.ndarray:
        """Flat cell index (row-major over coordinates)."""
        d = self.digits(sys, coords)
        out = d[..., 0]
        for k in range(1, self.dim):
            out = out * self.sides[k] + d[..., k]
        return out

    def coarsen(self, factor: int = 2) -> "GridPartition":
        """Merge blocks of ``factor`` cells per coordinate (exact refinement)."""
        if np.any(self.sides % factor):
            raise ContractViolationError("sides must be divisible by the factor")
        return GridPartition(self.sides // factor, self.dim, self.offset / factor)


@dataclass
class ItineraryWord:
    symbols: np.ndarray
    alphabet: int

    def __post_init__(self):
        self.symbols = np.asarray(self.symbols, dtype=int)
        if self.symbols.ndim != 1 or self.symbols.size < 1:
            raise ContractViolationError("word must be a nonempty 1-D symbol list")
        if np.any(self.symbols < 0) or np.any(self.symbols >= self.alphabet):
            raise ContractViolationError("symbol outside alphabet")

    @property
    def n(self) -> int:
        return self.symbols.size


# ---------------------------------------------------------------------------


def birkhoff_average(sys: SystemSpec, x0: Point, f, T: float, dt: float) -> float:
    """Time average (1/T) * integral of f along the orbit (trapezoid rule)."""
    if T < 10.0 * dt:
        raise ContractViolationError("need T >= 10*dt")
    traj = integrate_orbit(sys, x0, T, dt)
    vals = np.asarray(f(traj.positions), dtype=float)
    return float(np.trapezoid(vals, dx=dt) / traj.t)


def empirical_from_orbit(
    sys: SystemSpec,
    x0: Point,
    T: float,
    dt: float,
    burn_in: float = 0.0,
    thin: int = 1,
) -> EmpiricalMeasure:
    """Equal-weight atoms from a thinned post-burn-in orbit sample."""
    if burn_in >= T:
        raise ContractViolationError("burn_in must be smaller than T")
    if thin < 1:
        raise ContractViolationError("thin must be >= 1")
    traj = integrate_orbit(sys, x0, T, dt)
    k0 = int(np.ceil(burn_in / dt - 1e-9))
    pts = traj.positions[k0::thin]
    keep = singular_distance_many(sys, pts) > 1e-9
    pts = pts[keep]
    if pts.shape[0] == 0:
        raise DegenerateMeasureError("all samples fell on singular points")
    # collapse exact duplicates (constant trajectories)
    uniq, counts = np.unique(pts, axis=0, return_counts=True)
    return EmpiricalMeasure(uniq, counts / counts.sum())


def _orbit_samples(sys, starts, tau, n, dt=None):
    """Positions of each start at times 0, tau, ..., (n-1)*tau; (n, m, dim)."""
    if dt is None:
        sub = max(1, int(np.ceil(tau / 0.05 - 1e-9)))
    else:
        sub = int(round(tau / dt))
        if abs(sub * dt - tau) > 1e-9:
            raise ContractViolationError("dt must divide tau")
    if n == 1:
        return np.asarray(starts, dtype=float)[None, :, :]
    pos, _ = integrate_batch(sys, starts, (n - 1) * tau, tau / sub)
    return pos[::sub]


def itinerary(
    sys: SystemSpec,
    x0: Point,
    partition: GridPartition,
    tau: float,
    n: int,
    dt: Optional[float] = None,
) -> ItineraryWord:
    """Cell labels of the orbit at times 0, tau, ..., (n-1)*tau."""
    if n < 1 or tau <= 0:
        raise ContractViolationError("need n >= 1 and tau > 0")
    pos = _orbit_samples(sys, x0.coords[None, :], tau, n, dt)
    return ItineraryWord(partition.labels(sys, pos[:, 0, :]), partition.n_cells)


def atom_itineraries(
    sys: SystemSpec,
    measure: EmpiricalMeasure,
    partition: GridPartition,
    tau: float,
    n: int,
    dt: Optional[float] = None,
) -> np.ndarray:
    """(m, n) label array: itinerary of every atom, batch-integrated."""
    pos = _orbit_samples(sys, measure.points, tau, n, dt)
    return partition.labels(sys, pos).T


@dataclass
class SmbResult:
    entropy: float
    probes_used: int
    excluded: int
    small_class_fraction: float  # probes whose class holds < 5 atoms
    mean_log_speed: float
    slow_atom_fraction: float    # atoms with field speed < 1e-6


def smb_entropy_detail(
    sys: SystemSpec,
    measure: EmpiricalMeasure,
    partition: GridPartition,
    tau: float,
    n: int,
    probe_count: int = 200,
    seed: int = 0,
    dt: Optional[float] = None,
    labels: Optional[np.ndarray] = None,
) -> SmbResult:
    """Itinerary-class entropy estimate with diagnostics.

    For probe atoms x the class mass mu(xi_n(x)) is the total weight of atoms
    sharing x's length-n itinerary; the estimate averages -log(mass)/(n*tau)
    over probes, weighted by atom weight, so the figure is per unit time.
    """
    if probe_count < 30:
        raise ContractViolationError("need probe_count >= 30")
    if labels is None:
        labels = atom_itineraries(sys, measure, partition, tau, n, dt)
    _, inverse, counts = np.unique(
        labels, axis=0, return_inverse=True, return_counts=True
    )
    class_mass = np.bincount(inverse, weights=measure.weights)
    rng = np.random.default_rng(seed)
    m = measure.n_atoms
    if probe_count >= m:
        probes = np.arange(m)
    else:
        probes = rng.choice(m, size=probe_count, replace=False, p=measure.weights)
    mass = class_mass[inverse[probes]]
    w = measure.weights[probes]
    good = mass > 0
    excluded = int(np.sum(~good))
    if not np.any(good):
        raise EstimationFailureError("every probe class had zero mass")
    ent = float(np.sum(w[good] * (-np.log(mass[good]))) / np.sum(w[good]) / (n * tau))
    speeds = np.linalg.norm(np.asarray(sys.field(measure.points), dtype=float), axis=-1)
    pos_spd = speeds[speeds > 0]
    return SmbResult(
        entropy=ent,
        probes_used=int(np.sum(good)),
        excluded=excluded,
        small_class_fraction=float(np.mean(counts[inverse[probes[good]]] < 5)),
        mean_log_speed=float(np.mean(np.log(pos_spd))) if pos_spd.size else -np.inf,
        slow_atom_fraction=float(np.mean(speeds < 1e-6)),
    )


def smb_entropy(sys, measure, partition, tau, n, probe_count=200, **kw) -> float:
    return smb_entropy_detail(sys, measure, partition, tau, n, probe_count, **kw).entropy


# ---------------------------------------------------------------------------
# Hamming-ball combinatorics


def hamming_rho(w: ItineraryWord, v: ItineraryWord) -> float:
    """Mismatch fraction between equal-length words."""
    if w.n != v.n or w.alphabet != v.alphabet:
        raise ContractViolationError("words must share n and alphabet")
    return float(np.mean(w.symbols != v.symbols))


def hamming_ball_count(N: int, n: int, r: float) -> float:
    """log #B(word, r) = log sum_{k<=floor(nr)} C(n,k) (N-1)^k, stable."""
    if N < 3 or n < 1 or not 0.0 <= r <= 1.0:
        raise ContractViolationError("need N >= 3, n >= 1, r in [0, 1]")
    kmax = min(n, int(np.floor(n * r + 1e-9)))
    k = np.arange(kmax + 1)
    log_binom = gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1)
    return float(logsumexp(log_binom + k * np.log(N - 1)))


def hamming_ball_count_exhaustive(N: int, n: int, r: float) -> int:
    """Brute-force ball size by enumerating all N^n words (oracle use)."""
    kmax = int(np.floor(n * r + 1e-9))
    grids = np.indices((N,) * n).reshape(n, -1)
    mism = np.sum(grids != 0, axis=0)  # distance to the all-zeros word
    return int(np.sum(mism <= kmax))


def hamming_ball_rate(N: int, r: float) -> float:
    """Exponential growth rate r*log(N-1) - r*log r - (1-r)*log(1-r)."""
    if N < 3:
        raise ContractViolationError("need N >= 3")
    if not 0.0 < r < (N - 2.0) / N:
        raise ContractViolationError(f"rate formula needs 0 < r < (N-2)/N = {(N-2)/N:.4f}")
    return float(r * np.log(N - 1) - r * np.log(r) - (1 - r) * np.log(1 - r))

"""Vector fields, orbit integration, and metric geometry on the model spaces.

Three chart types are supported: the flat d-torus (coordinates mod 1 with the
quotient metric), an axis-aligned euclidean box (used with trapping regions),
and the mapping torus of a hyperbolic toral automorphism (base T^2, unit roof,
roof identification (x, 1) ~ (Ax, 0)).
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Callable, Optional

import numpy as np

from .errors import ContractViolationError, DomainEscapeError

FLAT_TORUS = "flat-torus"
EUCLIDEAN_BOX = "euclidean-box"
MAPPING_TORUS = "mapping-torus"

_CHARTS = (FLAT_TORUS, EUCLIDEAN_BOX, MAPPING_TORUS)


@dataclass(frozen=True)
class Point:
    coords: np.ndarray
    chart: str

    def __post_init__(self):
        object.__setattr__(self, "coords", np.asarray(self.coords, dtype=float))


@dataclass
class SystemSpec:
    """A vector field on one of the model spaces.

    ``field`` must accept an (..., dim) array of coordinates and return the
    field values with the same shape, so orbit integration can be batched.
    """

    dim: int
    field: Callable[[np.ndarray], np.ndarray]
    space: str
    singular_points: np.ndarray = dc_field(default_factory=lambda: np.zeros((0, 0)))
    lipschitz_hint: Optional[float] = None
    box_bounds: Optional[np.ndarray] = None   # (dim, 2) for euclidean-box
    roof_matrix: Optional[np.ndarray] = None  # (2, 2) integer matrix, mapping torus

    def __post_init__(self):
        if self.space not in _CHARTS:
            raise ContractViolationError(f"unknown space {self.space!r}")
        self.singular_points = np.asarray(self.singular_points, dtype=float)
        if self.singular_points.size == 0:
            self.singular_points = np.zeros((0, self.dim))
        if self.singular_points.shape[1] != self.dim:
            raise ContractViolationError("singular point dimension mismatch")
        if self.space == EUCLIDEAN_BOX:
            if self.box_bounds is None:
                raise ContractViolationError("euclidean-box needs box_bounds")
            self.box_bounds = np.asarray(self.box_bounds, dtype=float)
        if self.space == MAPPING_TORUS:
            if self.roof_matrix is None:
                raise ContractViolationError("mapping-torus needs roof_matrix")
            self.roof_matrix = np.asarray(self.roof_matrix, dtype=int)
            if self.dim != 3:
                raise ContractViolationError("mapping-torus chart is 3-dimensional")
        for s in self.singular_points:
            if np.linalg.norm(self.field(s)) >= 1e-12:
                raise ContractViolationError(
                    f"declared singular point {s} has nonzero field"
                )

    def point(self, coords) -> Point:
        coords = np.asarray(coords, dtype=float)
        if coords.shape != (self.dim,):
            raise ContractViolationError(
                f"expected {self.dim} coordinates, got shape {coords.shape}"
            )
        return Point(wrap_coords(self, coords), self.space)


@dataclass
class Trajectory:
    """A uniformly sampled orbit segment.

    ``positions`` has shape (n+1, dim) covering times 0, dt, ..., n*dt;
    ``speeds`` caches the field norm at each sample.
    """

    start: Point
    dt: float
    positions: np.ndarray
    speeds: np.ndarray
    chart: str

    @property
    def n_steps(self) -> int:
        return self.positions.shape[0] - 1

    @property
    def t(self) -> float:
        return self.n_steps * self.dt

    def prefix(self, n_steps: int) -> "Trajectory":
        """Truncate to the first ``n_steps`` steps (same dt)."""
        if not 1 <= n_steps <= self.n_steps:
            raise ContractViolationError("prefix length out of range")
        return Trajectory(
            self.start,
            self.dt,
            self.positions[: n_steps + 1],
            self.speeds[: n_steps + 1],
            self.chart,
        )


# ---------------------------------------------------------------------------
# chart geometry


def wrap_coords(sys: SystemSpec, coords: np.ndarray) -> np.ndarray:
    """Map coordinates into the fundamental domain of the chart."""
    coords = np.asarray(coords, dtype=float)
    if sys.space == FLAT_TORUS:
        return np.mod(coords, 1.0)
    if sys.space == EUCLIDEAN_BOX:
        return coords
    # mapping torus: wrap the base, then resolve roof crossings
    if coords.ndim == 1:
        return wrap_coords(sys, coords[None, :])[0]
    out = coords.copy()
    out[..., :2] = np.mod(out[..., :2], 1.0)
    A = sys.roof_matrix
    s = out[..., 2]
    # forward crossings (s >= 1): base |-> A base, s |-> s - 1
    while np.any(s >= 1.0):
        m = s >= 1.0
        out[..., :2][m] = np.mod(out[..., :2][m] @ A.T, 1.0)
        s[m] -= 1.0
    Ainv = np.linalg.inv(A)
    while np.any(s < 0.0):
        m = s < 0.0
        out[..., :2][m] = np.mod(out[..., :2][m] @ Ainv.T, 1.0)
        s[m] += 1.0
    return out


def _torus_delta(p, q):
    d = np.abs(p - q) % 1.0
    return np.minimum(d, 1.0 - d)


def _torus_dist(p, q):
    return np.sqrt(np.sum(_torus_delta(p, q) ** 2, axis=-1))


def _circle_embed(theta):
    """Unit-speed embedding of R/Z into the plane: |e(a)-e(b)| = sin(pi*d)/pi."""
    a = 2.0 * np.pi * theta
    return np.stack([np.cos(a), np.sin(a)], axis=-1) / (2.0 * np.pi)


def _mt_features(sys: SystemSpec, p):
    """Embedding features for a mapping-torus point (x, s), s in [0, 1).

    The cover T^2 x R embeds into circle (+) l^2 slots via windowed torus
    embeddings, slot j carrying lam(s - j) * E(A^j x) with lam(s) = cos(pi*s/2).
    The deck transformation (x, s) -> (Ax, s - 1) acts by shifting slots, an
    isometry, so the min over slot alignments below is a true quotient metric.
    Only slots 0 and 1 are active for s in [0, 1).
    """
    A = sys.roof_matrix
    x, s = p[..., :2], p[..., 2]
    Ax = x @ A.T  # E is 1-periodic, no wrap needed
    e0 = _circle_embed(x).reshape(x.shape[:-1] + (-1,))
    e1 = _circle_embed(Ax).reshape(x.shape[:-1] + (-1,))
    lam0 = np.cos(0.5 * np.pi * s)[..., None]
    lam1 = np.sin(0.5 * np.pi * s)[..., None]
    g = _circle_embed(s[..., None]).reshape(s.shape + (-1,))
    return g, lam0 * e0, lam1 * e1


def _mapping_torus_dist(sys: SystemSpec, p, q):
    """Quotient metric on the mapping torus via the shift-isometric embedding.

    Candidates: slot alignments k = -1, 0, 1 plus the disjoint-support value
    (|k| >= 2, where the slot parts contribute their full norms).  Triangle
    inequality holds exactly because each candidate is a distance in a fixed
    normed space and the alignment group acts by isometries.
    """
    g_p, a0, a1 = _mt_features(sys, p)
    g_q, b0, b1 = _mt_features(sys, q)
    gg = np.sum((g_p - g_q) ** 2, axis=-1)

    def sq(v):
        return np.sum(v * v, axis=-1)

    d0 = gg + sq(a0 - b0) + sq(a1 - b1)
    d1 = gg + sq(a0) + sq(a1 - b0) + sq(b1)
    dm1 = gg + sq(a0 - b1) + sq(a1) + sq(b0)
    dfar = gg + sq(a0) + sq(a1) + sq(b0) + sq(b1)
    return np.sqrt(np.min(np.stack([d0, d1, dm1, dfar]), axis=0))


def distance_many(sys: SystemSpec, p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Vectorized chart distance; broadcasts over leading axes."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape[-1] != sys.dim or q.shape[-1] != sys.dim:
        raise ContractViolationError("coordinate dimension mismatch")
    if sys.space == FLAT_TORUS:
        return _torus_dist(p, q)
    if sys.space == EUCLIDEAN_BOX:
        return np.sqrt(np.sum((p - q) ** 2, axis=-1))
    return _mapping_torus_dist(sys, p, q)


def distance(sys: SystemSpec, p: Point, q: Point) -> float:
    if p.chart != q.chart:
        raise ContractViolationError("points live on different charts")
    return float(distance_many(sys, p.coords, q.coords))


def singular_distance_many(sys: SystemSpec, p: np.ndarray) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if sys.singular_points.shape[0] == 0:
        return np.full(p.shape[:-1], np.inf)
    d = distance_many(sys, p[..., None, :], sys.singular_points)
    return np.min(d, axis=-1)


def singular_distance(sys: SystemSpec, p: Point) -> float:
    return float(singular_distance_many(sys, p.coords))


# ---------------------------------------------------------------------------
# field evaluation and integration


def evaluate_field(sys: SystemSpec, p: Point) -> np.ndarray:
    if p.coords.shape != (sys.dim,):
        raise ContractViolationError("point dimension mismatch")
    return np.asarray(sys.field(p.coords), dtype=float)


def speeds_many(sys: SystemSpec, p: np.ndarray) -> np.ndarray:
    return np.linalg.norm(np.asarray(sys.field(p), dtype=float), axis=-1)


def _rk4_step(sys: SystemSpec, x: np.ndarray, dt: float) -> np.ndarray:
    f = sys.field
    k1 = np.asarray(f(x), dtype=float)
    k2 = np.asarray(f(x + 0.5 * dt * k1), dtype=float)
    k3 = np.asarray(f(x + 0.5 * dt * k2), dtype=float)
    k4 = np.asarray(f(x + dt * k3), dtype=float)
    return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def integrate_batch(
    sys: SystemSpec, starts: np.ndarray, t: float, dt: float
) -> tuple[np.ndarray, np.ndarray]:
    """RK4-integrate a batch of orbits.

    Returns (positions, speeds) with shapes (n+1, m, dim) and (n+1, m) where
    n = round(t / dt).  Raises DomainEscapeError if any orbit leaves a
    euclidean-box chart.
    """
    starts = np.atleast_2d(np.asarray(starts, dtype=float))
    if starts.shape[1] != sys.dim:
        raise ContractViolationError("start dimension mismatch")
    if dt <= 0 or t < dt - 1e-12:
        raise ContractViolationError("need 0 < dt <= t")
    n = int(round(t / dt))
    if abs(n * dt - t) > 1e-9 * max(1.0, t):
        raise ContractViolationError(f"dt={dt} does not divide t={t}")
    m = starts.shape[0]
    pos = np.empty((n + 1, m, sys.dim))
    pos[0] = wrap_coords(sys, starts)
    x = pos[0].copy()
    for k in range(1, n + 1):
        x = _rk4_step(sys, x, dt)
        x = wrap_coords(sys, x)
        if sys.space == EUCLIDEAN_BOX:
            lo, hi = sys.box_bounds[:, 0], sys.box_bounds[:, 1]
            if np.any(x < lo) or np.any(x > hi):
                raise DomainEscapeError(k * dt)
        pos[k] = x
    spd = speeds_many(sys, pos)
    return pos, spd


def integrate_orbit(sys: SystemSpec, x0: Point, t: float, dt: float) -> Trajectory:
    """Integrate a single orbit for time t with fixed step dt (RK4)."""
    pos, spd = integrate_batch(sys, x0.coords[None, :], t, dt)
    return Trajectory(x0, dt, pos[:, 0, :], spd[:, 0], sys.space)


def _sample_points(sys: SystemSpec, n: int, rng: np.random.Generator) -> np.ndarray:
    if sys.space == EUCLIDEAN_BOX:
        lo, hi = sys.box_bounds[:, 0], sys.box_bounds[:, 1]
        return lo + (hi - lo) * rng.random((n, sys.dim))
    return rng.random((n, sys.dim))


def estimate_lipschitz(sys: SystemSpec, samples: int, seed: int = 0) -> float:
    """Sampled lower estimate of the field's Lipschitz constant."""
    if samples < 2:
        raise ContractViolationError("need samples >= 2")
    rng = np.random.default_rng(seed)
    p = _sample_points(sys, samples, rng)
    q = _sample_points(sys, samples, rng)
    d = distance_many(sys, p, q)
    good = d > 1e-9
    if not np.any(good):
        return 0.0
    df = np.linalg.norm(
        np.asarray(sys.field(p), dtype=float) - np.asarray(sys.field(q), dtype=float),
        axis=-1,
    )
    return float(np.max(df[good] / d[good]))

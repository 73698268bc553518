"""Benchmark systems: two torus flows, Lorenz, and a cat-map suspension."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ContractViolationError
from .flow_core import EUCLIDEAN_BOX, FLAT_TORUS, MAPPING_TORUS, SystemSpec


@dataclass(frozen=True)
class SystemInfo:
    name: str
    spec: SystemSpec
    known_entropy: Optional[float] = None
    notes: str = ""


def make_linear_torus(omega=(1.0, np.sqrt(2.0))) -> SystemInfo:
    """Constant-slope linear flow on T^2; no singularities, zero entropy."""
    w = np.asarray(omega, dtype=float)
    if w.shape != (2,):
        raise ContractViolationError("omega must be a 2-vector")

    def field(x):
        x = np.asarray(x, dtype=float)
        return np.broadcast_to(w, x.shape).copy()

    spec = SystemSpec(dim=2, field=field, space=FLAT_TORUS,
                      lipschitz_hint=0.0)
    return SystemInfo(
        "linear-torus", spec, known_entropy=0.0,
        notes=f"translation flow, speed {np.linalg.norm(w):.6f}",
    )


def make_sine_grid_torus() -> SystemInfo:
    """X = (sin 2*pi*x1, sin 2*pi*x2) on T^2.

    Singular at the four half-integer lattice points; (1/2, 1/2) is a sink.
    Zero topological entropy (gradient-like in each cell).
    """

    def field(x):
        return np.sin(2.0 * np.pi * np.asarray(x, dtype=float))

    sing = np.array([[0.0, 0.0], [0.0, 0.5], [0.5, 0.0], [0.5, 0.5]])
    spec = SystemSpec(dim=2, field=field, space=FLAT_TORUS,
                      singular_points=sing, lipschitz_hint=2.0 * np.pi)
    return SystemInfo("sine-grid", spec, known_entropy=0.0,
                      notes="four singular points; sink at (1/2, 1/2)")


def make_lorenz(sigma=10.0, rho=28.0, beta=8.0 / 3.0) -> SystemInfo:
    """Classical Lorenz field in a box trapping region."""

    def field(p):
        p = np.asarray(p, dtype=float)
        x, y, z = p[..., 0], p[..., 1], p[..., 2]
        return np.stack(
            [sigma * (y - x), x * (rho - z) - y, x * y - beta * z], axis=-1
        )

    r = np.sqrt(beta * (rho - 1.0))
    sing = np.array([[0.0, 0.0, 0.0], [r, r, rho - 1.0], [-r, -r, rho - 1.0]])
    bounds = np.array([[-25.0, 25.0], [-35.0, 35.0], [-5.0, 55.0]])
    spec = SystemSpec(dim=3, field=field, space=EUCLIDEAN_BOX,
                      singular_points=sing, box_bounds=bounds,
                      lipschitz_hint=60.0)
    return SystemInfo("lorenz", spec,
                      notes="three fixed points inside the trapping box")


def make_cat_suspension() -> SystemInfo:
    """Unit-roof suspension of the cat map ((2,1),(1,1)) with vertical field.

    Topological entropy equals the cat map's, log((3 + sqrt 5) / 2).
    """
    A = np.array([[2, 1], [1, 1]])

    def field(p):
        p = np.asarray(p, dtype=float)
        out = np.zeros_like(p)
        out[..., 2] = 1.0
        return out

    spec = SystemSpec(dim=3, field=field, space=MAPPING_TORUS,
                      roof_matrix=A, lipschitz_hint=0.0)
    h = float(np.log((3.0 + np.sqrt(5.0)) / 2.0))
    return SystemInfo("cat-suspension", spec, known_entropy=h,
                      notes="suspension flow over a hyperbolic automorphism")


_FACTORIES = {
    "linear-torus": make_linear_torus,
    "sine-grid": make_sine_grid_torus,
    "lorenz": make_lorenz,
    "cat-suspension": make_cat_suspension,
}


def system_names() -> list[str]:
    return sorted(_FACTORIES)


def get_system(name: str, **kwargs) -> SystemInfo:
    if name not in _FACTORIES:
        raise ContractViolationError(
            f"unknown system {name!r}; choose from {system_names()}"
        )
    return _FACTORIES[name](**kwargs)

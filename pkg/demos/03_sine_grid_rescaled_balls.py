"""Rescaled Bowen balls on a flow with genuine singularities.

The field X = (sin 2*pi*x, sin 2*pi*y) vanishes at the four half-integer
lattice points and every regular orbit spirals into the sink at (1/2, 1/2),
so flow speeds decay exponentially.  Plain fixed-radius balls are the wrong
yardstick here; the rescaled variants shrink their radius with the local
speed and remain meaningful.

Shown below: the speed comparability scale, agreement of the three rescaled
variants, and the bounded-variation diagnostic gamma whose time average
gamma/t must decay — the integral of a potential difference between two
orbits in the same shrinking ball freezes once both orbits reach the sink.
"""

import numpy as np

from flowpressure import (
    EmpiricalMeasure,
    PotentialSpec,
    bounded_variation_gamma,
    constant_potential,
    estimate_comparability,
    get_system,
    metric_pressure_table,
    singular_distance_many,
)


def main():
    spec = get_system("sine-grid").spec

    c = estimate_comparability(spec)
    print(f"speed comparability scale: {c:.4f}")
    print("  (below this distance from a point, speeds differ by at most 2x;")
    print(f"   for this field it is about 1/(4 pi) = {1/(4*np.pi):.4f})")

    rng = np.random.default_rng(5)
    pts = rng.random((200, 2))
    pts = pts[singular_distance_many(spec, pts) > 0.05][:160]
    mu = EmpiricalMeasure(pts, np.full(len(pts), 1.0 / len(pts)))
    print("\nrescaled variants on a shared grid (exact covers, 18 candidates):")
    for v in ("r1", "r2", "r3"):
        tab = metric_pressure_table(spec, mu, constant_potential(0.0), v,
                                    [1.0, 1.5, 2.0, 3.0], [0.25], 0.25, 0.25,
                                    pool_size=18, mode="exact", seed=2)
        cells = ", ".join(f"{r.value:.3f}" for r in tab.rows)
        print(f"  {v}: cells [{cells}]  read-off {tab.read_offs[0.25]:+.4f}")
    print("  all three agree and read off ~0: the flow has zero entropy.")

    pot = PotentialSpec(lambda p: np.sin(2 * np.pi * np.asarray(p)[..., 0]),
                        "sin(2*pi*x)", 0.0)
    print("\nbounded-variation gamma over doubling horizons (eps = 0.02):")
    for t in (10.0, 20.0, 40.0):
        g = bounded_variation_gamma(spec, pot, "r2", t, 0.02, 0.1,
                                    pair_samples=100, seed=4)
        print(f"  t = {t:5.1f}: gamma = {g:.5f}   gamma/t = {g / t:.6f}")
    print("  gamma saturates, so gamma/t halves with each doubling of t.")


if __name__ == "__main__":
    main()

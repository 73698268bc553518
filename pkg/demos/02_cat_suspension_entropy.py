"""Positive entropy: the unit-roof suspension of the cat map.

The time-1 map of this flow is the hyperbolic toral automorphism
((2,1),(1,1)), whose entropy log((3 + sqrt 5)/2) ~ 0.9624 is the gold
standard for finite-scale estimators.  Two independent routes should agree
with it: itinerary (Shannon-McMillan-Breiman) word masses, and the growth
rate of weighted Bowen-ball cover counts.

This demo uses reduced sizes so it finishes in under a minute; the test
suite runs the full-size version (10^6 atoms).
"""

import numpy as np

from flowpressure import (
    EmpiricalMeasure,
    GridPartition,
    constant_potential,
    get_system,
    metric_pressure_table,
    smb_entropy,
)

TARGET = float(np.log((3.0 + np.sqrt(5.0)) / 2.0))


def main():
    spec = get_system("cat-suspension").spec
    rng = np.random.default_rng(7)

    print("itinerary entropy against word length (200k atoms):")
    pts = rng.random((200_000, 3))
    mu_big = EmpiricalMeasure(pts, np.full(len(pts), 1.0 / len(pts)))
    part = GridPartition([8, 8, 4], 3)
    for n in (4, 8, 12):
        h = smb_entropy(spec, mu_big, part, 1.0, n, probe_count=300, dt=1.0)
        print(f"  n = {n:2d}: h = {h:.4f}   (target {TARGET:.4f})")
    print("  estimates approach the target from above as words lengthen;")
    print("  the floor is set by atom count, not by the dynamics.")

    print("\ncover growth rate (1500 atoms, plain Bowen balls):")
    small = rng.random((1500, 3))
    mu = EmpiricalMeasure(small, np.full(1500, 1.0 / 1500))
    tab = metric_pressure_table(spec, mu, constant_potential(0.0), "plain",
                                [1.0, 2.0, 3.0], [0.2], 0.25, 0.25,
                                pool_size=1500, seed=3)
    for row in tab.rows:
        print(f"  t = {row.t}: log N / t = {row.value:.4f}")
    print(f"  read-off slope: {tab.read_offs[0.2]:.4f}  (target {TARGET:.4f},"
          " coarse — cover counts saturate on small atom clouds)")


if __name__ == "__main__":
    main()

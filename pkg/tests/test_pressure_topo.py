"""Spanning/separating sets on compact samples and the topological tables."""

import numpy as np
import pytest

from flowpressure import (
    BallVariant,
    EmpiricalMeasure,
    EmptyCompactError,
    build_compact_sample,
    constant_potential,
    estimate_comparability,
    greedy_spanning,
    integrate_batch,
    maximal_separating,
    sandwich_check,
    singular_distance_many,
    topo_pressure_table,
    variational_gap,
)
from flowpressure.pressure_metric import membership_matrix


def _member(spec, K, variant, t, eps, dt, centers=None):
    idx = np.arange(len(K.points)) if centers is None else centers
    pos_x, spd_x = integrate_batch(spec, K.points[idx], t, dt)
    pos_y, _ = integrate_batch(spec, K.points, t, dt)
    return membership_matrix(spec, variant, pos_x, spd_x, pos_y, eps, dt,
                             [int(round(t / dt))])[0]


# ---------------------------------------------------------------------------
# compact samples


def test_compact_sample_respects_singular_margin(sine_grid, rng):
    K = build_compact_sample(sine_grid.spec, rng.random((300, 2)),
                             rho_sing=0.2, max_points=50)
    assert np.all(singular_distance_many(sine_grid.spec, K.points) >= 0.2 - 1e-12)
    assert K.fill_radius > 0


def test_compact_sample_fill_radius_shrinks(linear_torus, rng):
    pts = rng.random((500, 2))
    small = build_compact_sample(linear_torus.spec, pts, 1e-9, 20)
    large = build_compact_sample(linear_torus.spec, pts, 1e-9, 200)
    assert large.fill_radius <= small.fill_radius


def test_compact_sample_empty_raises(sine_grid, rng):
    with pytest.raises(EmptyCompactError):
        build_compact_sample(sine_grid.spec, rng.random((50, 2)), 10.0, 20)


# ---------------------------------------------------------------------------
# spanning and separating


def test_greedy_spanning_covers_everything(linear_torus, rng):
    spec = linear_torus.spec
    K = build_compact_sample(spec, rng.random((120, 2)), 1e-9, 60)
    pot = constant_potential(0.0)
    sol = greedy_spanning(spec, K, pot, "r1", 4.0, 0.2, 0.25)
    member = _member(spec, K, BallVariant.R1, 4.0, 0.2, 0.25)
    assert bool(member[sol.indices].any(axis=0).all())


def test_maximal_separating_is_separated_and_maximal(linear_torus, rng):
    spec = linear_torus.spec
    K = build_compact_sample(spec, rng.random((120, 2)), 1e-9, 60)
    pot = constant_potential(0.0)
    for order in ("weight-desc", "input"):
        sol = maximal_separating(spec, K, pot, "r1", 4.0, 0.1, 0.25, order=order)
        member = _member(spec, K, BallVariant.R1, 4.0, 0.1, 0.25)
        sub = member[np.ix_(sol.indices, sol.indices)]
        off = sub & ~np.eye(len(sol.indices), dtype=bool)
        assert not off.any()          # pairwise separated
        assert sol.maximal
        covered = member[sol.indices].any(axis=0) | member[:, sol.indices].any(axis=1)
        assert covered.all()          # nothing else can be inserted


def test_spanning_shift_identity(linear_torus, rng):
    spec = linear_torus.spec
    K = build_compact_sample(spec, rng.random((80, 2)), 1e-9, 40)
    base = greedy_spanning(spec, K, constant_potential(0.0), "r1", 2.0, 0.2, 0.25)
    lift = greedy_spanning(spec, K, constant_potential(3.0), "r1", 2.0, 0.2, 0.25)
    assert lift.log_weight == pytest.approx(base.log_weight + 3.0 * 2.0, abs=1e-9)


def test_sandwich_has_no_violations(linear_torus, rng):
    spec = linear_torus.spec
    K = build_compact_sample(spec, rng.random((150, 2)), 1e-9, 50)
    rep = sandwich_check(spec, K, constant_potential(0.0), 4.0,
                         [0.05, 0.1, 0.2], 0.25)
    assert rep.violations == 0


def test_topo_table_schema_and_methods(linear_torus, rng):
    spec = linear_torus.spec
    Ks = [build_compact_sample(spec, rng.random((100, 2)), 1e-9, 40, K_id="K0")]
    tab = topo_pressure_table(spec, Ks, constant_potential(0.0), "r1",
                              [2.0, 4.0], [0.15], 0.25)
    methods = {r.method for r in tab.rows}
    assert methods == {"spanning", "separating"}
    assert all(np.isfinite(r.value) and r.delta == 0.0 for r in tab.rows)
    assert 0.15 in tab.read_offs


# ---------------------------------------------------------------------------
# comparability and the variational inequality


def test_comparability_constants():
    from flowpressure import get_system
    assert estimate_comparability(get_system("linear-torus").spec, 4000, seed=0) == pytest.approx(1.0)
    c = estimate_comparability(get_system("sine-grid").spec, 4000, seed=0)
    assert 0.02 < c < 0.15  # speed doubles within ~1/(4 pi) of a singular point


def test_variational_gap_no_violations(linear_torus, rng):
    spec = linear_torus.spec
    K = build_compact_sample(spec, rng.random((120, 2)), 1e-9, 50)
    w = np.full(len(K.points), 1.0 / len(K.points))
    mus = [EmpiricalMeasure(K.points, w)]
    rep = variational_gap(spec, mus, constant_potential(0.0), K,
                          [2.0, 4.0], [0.15, 0.25], 0.2, 0.25)
    assert rep.violations == 0

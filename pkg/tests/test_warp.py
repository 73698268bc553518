"""Warp-path feasibility: DP versus exhaustive enumeration, ball membership."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from flowpressure import (
    BallVariant,
    ContractViolationError,
    WarpBand,
    WarpPath,
    check_warp,
    dp_feasible,
    enumerate_staircase_feasible,
    find_warp,
    in_ball,
    inclusion_check_31,
    integrate_orbit,
)


def _pool(system, n_starts, T, dt, seed=1):
    rng = np.random.default_rng(seed)
    return [integrate_orbit(system.spec, system.spec.point(p), T, dt)
            for p in rng.random((n_starts, system.spec.dim))]


# ---------------------------------------------------------------------------
# staircase DP against brute-force path enumeration


@given(st.integers(2, 7), st.integers(2, 7), st.integers(0, 10**9))
@settings(max_examples=200, deadline=None)
def test_dp_matches_enumeration(rows, cols, seed):
    rng = np.random.default_rng(seed)
    ok = rng.random((rows, cols)) < 0.55
    assert bool(dp_feasible(ok)[-1, -1]) == enumerate_staircase_feasible(ok)


def test_dp_all_true_is_feasible():
    assert dp_feasible(np.ones((5, 5), dtype=bool))[-1, -1]


def test_dp_blocked_corner_is_infeasible():
    ok = np.ones((4, 4), dtype=bool)
    ok[0, 0] = False
    assert not dp_feasible(ok)[-1, -1]
    assert not enumerate_staircase_feasible(ok)


# ---------------------------------------------------------------------------
# warp paths


def test_warp_path_rejects_non_staircase():
    with pytest.raises(ContractViolationError):
        WarpPath(np.array([[0, 0], [2, 1]]))  # skips a step
    with pytest.raises(ContractViolationError):
        WarpPath(np.array([[0, 0], [1, 1], [0, 1]]))  # decreasing


def test_find_warp_identical_orbits_returns_diagonal(linear_torus):
    traj = integrate_orbit(linear_torus.spec, linear_torus.spec.point([0.1, 0.1]), 2.0, 0.25)
    path = find_warp(BallVariant.R2, linear_torus.spec, traj, traj, 0.05)
    assert path is not None
    assert np.array_equal(path.pairs[:, 0], path.pairs[:, 1])
    assert check_warp(BallVariant.R2, linear_torus.spec, traj, traj, 0.05, path)


def test_find_warp_none_when_far(linear_torus):
    spec = linear_torus.spec
    a = integrate_orbit(spec, spec.point([0.0, 0.0]), 2.0, 0.25)
    b = integrate_orbit(spec, spec.point([0.5, 0.5]), 2.0, 0.25)
    assert find_warp(BallVariant.R2, spec, a, b, 0.01) is None
    assert not in_ball(BallVariant.R2, spec, a, b, 0.01)


def test_found_warp_always_verifies(sine_grid, rng):
    spec = sine_grid.spec
    hits = 0
    for _ in range(60):
        x0 = rng.random(2)
        y0 = (x0 + 0.02 * rng.standard_normal(2)) % 1.0
        a = integrate_orbit(spec, spec.point(x0), 2.0, 0.25)
        b = integrate_orbit(spec, spec.point(y0), 2.0, 0.25)
        if np.any(a.speeds <= 0.0):
            continue
        for variant in (BallVariant.R2, BallVariant.R3):
            path = find_warp(variant, spec, a, b, 0.3)
            if path is not None:
                hits += 1
                assert check_warp(variant, spec, a, b, 0.3, path)
    assert hits > 20


def test_plain_ball_is_pointwise_distance(linear_torus):
    spec = linear_torus.spec
    a = integrate_orbit(spec, spec.point([0.10, 0.20]), 2.0, 0.25)
    b = integrate_orbit(spec, spec.point([0.13, 0.20]), 2.0, 0.25)
    # translation flow: separation is constant, exactly 0.03
    assert in_ball(BallVariant.PLAIN, spec, a, b, 0.031)
    assert not in_ball(BallVariant.PLAIN, spec, a, b, 0.029)


def test_mismatched_dt_rejected(linear_torus):
    spec = linear_torus.spec
    a = integrate_orbit(spec, spec.point([0.1, 0.1]), 2.0, 0.25)
    b = integrate_orbit(spec, spec.point([0.1, 0.1]), 2.0, 0.5)
    with pytest.raises(ContractViolationError):
        in_ball(BallVariant.PLAIN, spec, a, b, 0.1)


def test_band_widens_membership(linear_torus):
    spec = linear_torus.spec
    a = integrate_orbit(spec, spec.point([0.10, 0.20]), 2.0, 0.25)
    b = integrate_orbit(spec, spec.point([0.14, 0.20]), 2.0, 0.25)
    narrow = WarpBand(lam=0.01, b=0.0)
    wide = WarpBand(lam=0.9, b=0.0)
    got_narrow = in_ball(BallVariant.R2, spec, a, b, 0.03, narrow)
    got_wide = in_ball(BallVariant.R2, spec, a, b, 0.03, wide)
    assert got_wide or not got_narrow  # wider band can only add memberships


# ---------------------------------------------------------------------------
# inclusion between the two warped variants


@pytest.mark.parametrize("name,eps,T", [("linear_torus", 0.1, 4.0), ("sine_grid", 0.1, 3.0)])
def test_inclusion_check_has_no_violations(name, eps, T, request):
    system = request.getfixturevalue(name)
    pool = _pool(system, 16, T, 0.25)
    report = inclusion_check_31(system.spec, pool, eps=eps, lam=0.5, samples=200, seed=0)
    assert report.violations == 0
    assert report.r3_memberships > 0

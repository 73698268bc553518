"""Empirical measures, partitions, itineraries, SMB entropy, Hamming balls."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from flowpressure import (
    ContractViolationError,
    EmpiricalMeasure,
    GridPartition,
    ItineraryWord,
    birkhoff_average,
    empirical_from_orbit,
    hamming_ball_count,
    hamming_ball_count_exhaustive,
    hamming_ball_rate,
    hamming_rho,
    itinerary,
    smb_entropy,
    smb_entropy_detail,
)


# ---------------------------------------------------------------------------
# measures and partitions


def test_measure_weights_must_sum_to_one(rng):
    pts = rng.random((10, 2))
    with pytest.raises(ContractViolationError):
        EmpiricalMeasure(pts, np.full(10, 0.2))


def test_empirical_from_orbit_drops_singular_atoms(sine_grid):
    spec = sine_grid.spec
    mu = empirical_from_orbit(spec, spec.point([0.3, 0.4]), 20.0, 0.05)
    from flowpressure import singular_distance_many
    assert np.all(singular_distance_many(spec, mu.points) > 1e-9)
    assert mu.weights.sum() == pytest.approx(1.0, abs=1e-9)


def test_partition_digits_known_cells(linear_torus):
    part = GridPartition(4, 2, offset=np.zeros(2))
    spec = linear_torus.spec
    assert part.digits(spec, np.array([[0.1, 0.1]]))[0].tolist() == [0, 0]
    assert part.digits(spec, np.array([[0.9, 0.30]]))[0].tolist() == [3, 1]


def test_partition_coarsen_merges_exactly(rng, linear_torus):
    spec = linear_torus.spec
    part = GridPartition(8, 2)
    coarse = part.coarsen(2)
    pts = rng.random((200, 2))
    assert np.array_equal(part.digits(spec, pts) // 2, coarse.digits(spec, pts))


def test_partition_coarsen_rejects_bad_factor():
    with pytest.raises(ContractViolationError):
        GridPartition(9, 2).coarsen(2)


def test_partition_vector_sides(cat_suspension):
    part = GridPartition([8, 8, 4], 3, offset=np.zeros(3))
    lab = part.digits(cat_suspension.spec, np.array([[0.99, 0.0, 0.99]]))[0]
    assert lab.tolist() == [7, 0, 3]


# ---------------------------------------------------------------------------
# Birkhoff averages and itineraries


def test_birkhoff_constant_function(linear_torus):
    spec = linear_torus.spec
    val = birkhoff_average(spec, spec.point([0.2, 0.4]), lambda p: np.full(np.shape(p)[:-1], 3.5), 20.0, 0.05)
    assert val == pytest.approx(3.5, abs=1e-9)


def test_birkhoff_sine_average_decays(linear_torus):
    spec = linear_torus.spec
    f = lambda p: np.sin(2 * np.pi * np.asarray(p)[..., 0])
    val = birkhoff_average(spec, spec.point([0.2, 0.4]), f, 200.0, 0.05)
    assert abs(val) < 0.05  # space average of sine is 0; equidistribution


def test_itinerary_shape_and_alphabet(linear_torus):
    part = GridPartition(4, 2)
    word = itinerary(linear_torus.spec, linear_torus.spec.point([0.1, 0.2]), part, 0.5, 12)
    assert len(word.symbols) == 12
    assert all(0 <= s < word.alphabet for s in word.symbols)


# ---------------------------------------------------------------------------
# SMB entropy


def test_smb_single_atom_is_zero(linear_torus):
    mu = EmpiricalMeasure(np.array([[0.25, 0.25]]), np.array([1.0]))
    h = smb_entropy(linear_torus.spec, mu, GridPartition(4, 2), 1.0, 4)
    assert h == pytest.approx(0.0, abs=1e-12)


def test_smb_detail_reports_probes(linear_torus):
    spec = linear_torus.spec
    mu = empirical_from_orbit(spec, spec.point([0.1, 0.2]), 100.0, 0.05)
    det = smb_entropy_detail(spec, mu, GridPartition(2, 2), 2.0, 3, probe_count=100)
    assert det.probes_used > 0
    assert det.entropy >= 0.0


def test_smb_zero_entropy_flow_decays(linear_torus):
    spec = linear_torus.spec
    mu = empirical_from_orbit(spec, spec.point([0.1, 0.2]), 500.0, 0.05)
    h = smb_entropy(spec, mu, GridPartition(2, 2), 8.0, 2)
    assert h < 0.2


# ---------------------------------------------------------------------------
# Hamming balls


def test_hamming_rho_examples():
    a = ItineraryWord(np.array([0, 1, 2, 0]), 3)
    b = ItineraryWord(np.array([0, 1, 0, 0]), 3)
    assert hamming_rho(a, a) == 0.0
    assert hamming_rho(a, b) == pytest.approx(0.25)


@given(st.integers(3, 4), st.integers(1, 7),
       st.sampled_from([0.0, 0.2, 0.35, 0.5, 0.75, 0.9]))
@settings(max_examples=60, deadline=None)
def test_hamming_count_matches_exhaustive(N, n, r):
    log_count = hamming_ball_count(N, n, r)
    exact = hamming_ball_count_exhaustive(N, n, r)
    assert round(np.exp(log_count)) == exact


def test_hamming_rate_matches_count_growth():
    for r in (0.1, 0.25):
        n = 4000
        rate = hamming_ball_rate(3, r)
        assert abs(hamming_ball_count(3, n, r) / n - rate) < 0.01


def test_hamming_rate_edge_cases():
    with pytest.raises(ContractViolationError):
        hamming_ball_rate(3, 0.0)  # rate formula defined only on 0 < r < (N-2)/N
    with pytest.raises(ContractViolationError):
        hamming_ball_count(1, 4, 0.5)

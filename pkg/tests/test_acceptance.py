"""Acceptance gate: one test and one printed pass/fail line per criterion.

Every tolerance below is part of the project contract, not a tuning knob.
Run with ``pytest -v tests/test_acceptance.py`` for the line-per-criterion
view; ``-s`` additionally shows the printed values.
"""

import itertools
import json
import time

import numpy as np
import pytest

from flowpressure import (
    BallVariant,
    EmpiricalMeasure,
    GridPartition,
    build_compact_sample,
    constant_potential,
    dp_feasible,
    empirical_from_orbit,
    enumerate_staircase_feasible,
    get_system,
    hamming_ball_count,
    hamming_ball_count_exhaustive,
    hamming_ball_rate,
    inclusion_check_31,
    integrate_batch,
    integrate_orbit,
    katok_check,
    maximal_separating,
    metric_cover_value,
    metric_pressure_table,
    smb_entropy,
    variational_gap,
)
from flowpressure.cli import main as cli_main
from flowpressure.pressure_metric import (
    PotentialSpec,
    bounded_variation_gamma_detail,
    membership_matrix,
)
from flowpressure.pressure_topo import greedy_spanning
from flowpressure.flow_core import singular_distance_many

CAT_ENTROPY = float(np.log((3.0 + np.sqrt(5.0)) / 2.0))


def _verdict(num, label, ok, detail):
    print(f"ACCEPTANCE {num:02d} [{label}]: {'PASS' if ok else 'FAIL'} — {detail}")
    assert ok, f"criterion {num} ({label}): {detail}"


# ---------------------------------------------------------------------------


def test_criterion_01_hamming_exact():
    start = time.time()
    worst = 0.0
    for N in (3, 4):
        for n in range(1, 9):
            for r in (0.0, 0.25, 0.5, 0.9):
                exact = hamming_ball_count_exhaustive(N, n, r)
                got = round(np.exp(hamming_ball_count(N, n, r)))
                worst = max(worst, abs(got - exact))
    elapsed = time.time() - start
    _verdict(1, "Hamming counts exact", worst == 0 and elapsed < 10.0,
             f"max count deviation {worst:g}, {elapsed:.1f}s")


def test_criterion_02_hamming_rate():
    start = time.time()
    worst = max(abs(hamming_ball_count(3, 4000, r) / 4000 - hamming_ball_rate(3, r))
                for r in (0.1, 0.25))
    elapsed = time.time() - start
    _verdict(2, "Hamming rate convergence", worst < 0.01 and elapsed < 1.0,
             f"max |log-count/n - rate| = {worst:.5f}, {elapsed:.2f}s")


def test_criterion_03_katok_zero_entropy():
    spec = get_system("linear-torus").spec  # omega = (1, sqrt 2)
    mu = empirical_from_orbit(spec, spec.point([0.1, 0.2]), 500.0, 0.05, thin=2)
    smb_mu = empirical_from_orbit(spec, spec.point([0.1, 0.2]), 5000.0, 0.05)
    rep = katok_check(spec, mu, constant_potential(2.0), "plain",
                      t_grid=[25.0, 50.0, 75.0, 100.0], eps_grid=[0.05],
                      delta=0.1, dt=0.5, partition=GridPartition(2, 2),
                      tau=12.0, n=2, pool_size=700, mode="greedy", seed=0,
                      smb_measure=smb_mu, smb_dt=0.05)
    metric = rep.metric_read_off[0.05]
    smb_side = rep.smb_side
    ok = abs(metric - 2.0) <= 0.15 and abs(smb_side - 2.0) <= 0.15
    _verdict(3, "Katok zero entropy", ok,
             f"metric read-off {metric:.4f}, SMB side {smb_side:.4f} (target 2 +/- 0.15)")


def test_criterion_04_katok_positive_entropy():
    spec = get_system("cat-suspension").spec
    # SMB side: 10^6-atom sample of the (Lebesgue) invariant measure
    rng = np.random.default_rng(7)
    pts = rng.random((1_000_000, 3))
    mu_big = EmpiricalMeasure(pts, np.full(len(pts), 1.0 / len(pts)))
    h = smb_entropy(spec, mu_big, GridPartition([8, 8, 4], 3), 1.0, 12,
                    probe_count=400, dt=1.0)
    smb_rel = abs(h - CAT_ENTROPY) / CAT_ENTROPY
    # metric side: coarser, set-cover bounded
    rng = np.random.default_rng(11)
    small = rng.random((3000, 3))
    mu = EmpiricalMeasure(small, np.full(3000, 1.0 / 3000))
    tab = metric_pressure_table(spec, mu, constant_potential(0.0), "plain",
                                [1.0, 2.0, 3.0, 4.0], [0.15, 0.2], 0.25, 0.25,
                                pool_size=3000, mode="greedy", seed=3)
    metric = tab.read_offs[0.15]
    met_rel = abs(metric - CAT_ENTROPY) / CAT_ENTROPY
    ok = smb_rel < 0.20 and met_rel < 0.30
    _verdict(4, "Katok positive entropy", ok,
             f"SMB {h:.4f} ({smb_rel:.1%} off {CAT_ENTROPY:.4f}), "
             f"metric read-off {metric:.4f} ({met_rel:.1%} off)")


def test_criterion_05_variant_equivalence():
    cases = {
        "linear-torus": dict(t_grid=[2.0, 4.0, 6.0, 8.0], eps=0.2, delta=0.2,
                             margin=0.05, T_incl=4.0),
        "sine-grid": dict(t_grid=[1.0, 1.5, 2.0, 3.0], eps=0.25, delta=0.25,
                          margin=0.05, T_incl=3.0),
    }
    worst_gap = 0.0
    order_bad = incl_bad = 0
    for name, c in cases.items():
        spec = get_system(name).spec
        rng = np.random.default_rng(5)
        pts = rng.random((200, 2))
        pts = pts[singular_distance_many(spec, pts) > c["margin"]][:160]
        mu = EmpiricalMeasure(pts, np.full(len(pts), 1.0 / len(pts)))
        tabs = {v: metric_pressure_table(spec, mu, constant_potential(0.0), v,
                                         c["t_grid"], [c["eps"]], c["delta"],
                                         0.25, pool_size=18, mode="exact", seed=2)
                for v in ("r1", "r2", "r3")}
        reads = [tabs[v].read_offs[c["eps"]] for v in tabs]
        worst_gap = max(worst_gap, max(abs(a - b)
                        for a, b in itertools.combinations(reads, 2)))
        for a, b in zip(tabs["r1"].rows, tabs["r2"].rows):
            order_bad += a.value < b.value - 1e-12
        pool = [integrate_orbit(spec, spec.point(p), c["T_incl"], 0.25)
                for p in rng.random((16, 2))
                if singular_distance_many(spec, p[None])[0] > c["margin"]]
        incl_bad += inclusion_check_31(spec, pool, eps=0.1, lam=0.5,
                                       samples=200, seed=0).violations
    ok = worst_gap <= 0.1 and order_bad == 0 and incl_bad == 0
    _verdict(5, "variant equivalence", ok,
             f"max read-off gap {worst_gap:.4f}, R1<R2 cells {order_bad}, "
             f"inclusion violations {incl_bad}")


def test_criterion_06_shift_identity():
    spec = get_system("linear-torus").spec
    rng = np.random.default_rng(13)
    pts = rng.random((80, 2))
    mu = EmpiricalMeasure(pts, np.full(80, 1.0 / 80))
    K = build_compact_sample(spec, pts, 1e-9, 40)
    t = 4.0
    worst = 0.0
    for c in (-1.0, 0.5, 3.0):
        f0, fc = constant_potential(0.0), constant_potential(c)
        for mode in ("greedy", "exact"):
            a = metric_cover_value(spec, mu, f0, "plain", t, 0.2, 0.3, 0.25,
                                   pts[:18], mode=mode).log_weight
            b = metric_cover_value(spec, mu, fc, "plain", t, 0.2, 0.3, 0.25,
                                   pts[:18], mode=mode).log_weight
            worst = max(worst, abs(b - a - c * t))
        a = greedy_spanning(spec, K, f0, "r1", t, 0.2, 0.25).log_weight
        b = greedy_spanning(spec, K, fc, "r1", t, 0.2, 0.25).log_weight
        worst = max(worst, abs(b - a - c * t))
        a = maximal_separating(spec, K, f0, "r1", t, 0.1, 0.25).log_weight
        b = maximal_separating(spec, K, fc, "r1", t, 0.1, 0.25).log_weight
        worst = max(worst, abs(b - a - c * t))
    _verdict(6, "potential shift identity", worst < 1e-9,
             f"max |shift defect| = {worst:.2e}")


def test_criterion_07_separating_spans():
    pot = constant_potential(0.0)
    ok_trials = total = 0
    for name, eps_hi, t_choices in [("linear-torus", 0.3, [2.0, 4.0, 8.0]),
                                    ("sine-grid", 0.07, [1.0, 2.0, 3.0])]:
        spec = get_system(name).spec
        rng = np.random.default_rng(17)
        for trial in range(50):
            pts = rng.random((120, 2))
            K = build_compact_sample(spec, pts, 0.05, 60, K_id=f"K{trial}")
            t = float(rng.choice(t_choices))
            eps = float(rng.uniform(0.3, 1.0) * eps_hi)
            sep = maximal_separating(spec, K, pot, "r1", t, eps / 2.0, 0.25)
            pos_x, spd_x = integrate_batch(spec, K.points[sep.indices], t, 0.25)
            pos_y, _ = integrate_batch(spec, K.points, t, 0.25)
            mem = membership_matrix(spec, BallVariant.R1, pos_x, spd_x, pos_y,
                                    eps, 0.25, [int(round(t / 0.25))])[0]
            ok_trials += bool(mem.any(axis=0).all())
            total += 1
    _verdict(7, "separating sets span at doubled radius", ok_trials == total,
             f"{ok_trials}/{total} trials span")


def test_criterion_08_gamma_trend():
    spec = get_system("sine-grid").spec
    pot = PotentialSpec(lambda p: np.sin(2 * np.pi * np.asarray(p)[..., 0]),
                        "sin(2*pi*x0)", 0.0)
    ratios = []
    for t in (10.0, 20.0, 40.0, 80.0):
        r = bounded_variation_gamma_detail(spec, pot, "r2", t, 0.02, 0.1,
                                           pair_samples=100, seed=4)
        assert not r.no_admissible_pairs
        ratios.append(r.gamma / t)
    monotone = all(b <= a * 1.05 for a, b in zip(ratios, ratios[1:]))
    _verdict(8, "gamma/t decreasing", monotone and ratios[-1] < ratios[0],
             "gamma/t = " + ", ".join(f"{v:.6f}" for v in ratios))


def test_criterion_09_variational_inequality():
    pot = constant_potential(0.0)
    total_viol = 0
    cases = []
    rng = np.random.default_rng(9)
    for name, tg, eg, rho in [("linear-torus", [2.0, 4.0, 6.0], [0.15, 0.25], 1e-9),
                              ("sine-grid", [1.0, 2.0, 3.0], [0.15, 0.25], 0.05),
                              ("cat-suspension", [1.0, 2.0, 3.0], [0.12, 0.2], 1e-9)]:
        spec = get_system(name).spec
        K = build_compact_sample(spec, rng.random((150, spec.dim)), rho, 60, K_id=name)
        mus = [EmpiricalMeasure(K.points, np.full(len(K.points), 1.0 / len(K.points)))]
        rep = variational_gap(spec, mus, pot, K, tg, eg, 0.2, 0.25)
        total_viol += rep.violations
        cases.append(f"{name}:{rep.violations}")
    lor = get_system("lorenz").spec
    pos, _ = integrate_batch(lor, np.array([[1.0, 1.0, 1.0]]), 60.0, 0.005)
    cloud = pos[4000::40, 0]
    K = build_compact_sample(lor, cloud, 0.5, 60, K_id="lorenz")
    mus = [EmpiricalMeasure(K.points, np.full(len(K.points), 1.0 / len(K.points)))]
    rep = variational_gap(lor, mus, pot, K, [1.0, 2.0, 3.0], [2.0, 3.0], 0.2, 0.02)
    total_viol += rep.violations
    cases.append(f"lorenz:{rep.violations}")
    _verdict(9, "metric <= topological", total_viol == 0,
             "violations " + " ".join(cases))


def test_criterion_10_dp_oracle():
    rng = np.random.default_rng(2024)
    mismatches = 0
    for _ in range(500):
        ok = rng.random((8, 8)) < rng.uniform(0.3, 0.7)
        if bool(dp_feasible(ok)[-1, -1]) != enumerate_staircase_feasible(ok):
            mismatches += 1
    _verdict(10, "warp DP vs enumeration", mismatches == 0,
             f"{mismatches} mismatches over 500 8x8 instances")


def test_criterion_11_determinism(tmp_path):
    base = {
        "system": {"name": "sine-grid"},
        "potential": {"type": "coordinate-sine", "axis": 0},
        "variants": ["r1", "r2"],
        "t_grid": [1.0, 2.0],
        "eps_grid": [0.2],
        "delta": [0.3],
        "dt": 0.25,
        "pool_size": 60,
        "seed": 6,
        "rho_sing": 0.05,
        "max_points": 40,
        "measure": {"x0": [0.21, 0.37], "T": 30.0, "dt": 0.05},
    }
    payloads = {}
    for cmd, csv_name in [("estimate-metric", "metric_pressure.csv"),
                          ("estimate-topo", "topo_pressure.csv")]:
        runs = []
        for tag in ("a", "b"):
            out = tmp_path / f"{cmd}-{tag}"
            cfg = dict(base, out=str(out))
            cfg_path = tmp_path / f"{cmd}-{tag}.json"
            cfg_path.write_text(json.dumps(cfg))
            assert cli_main([cmd, "--config", str(cfg_path)]) == 0
            runs.append((out / csv_name).read_bytes())
        payloads[cmd] = runs[0] == runs[1]
    ok = all(payloads.values())
    _verdict(11, "byte-identical CSVs", ok,
             ", ".join(f"{k}: {'identical' if v else 'DIFFER'}" for k, v in payloads.items()))

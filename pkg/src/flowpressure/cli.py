"""Command-line runner: JSON config in, CSV tables and a JSON report out.

Commands
    estimate-metric      metric pressure tables per variant and delta
    estimate-topo        topological pressure tables on sampled compact sets
    verify-katok         metric read-off vs entropy + potential average
    verify-equivalence   variant tables side by side + ball inclusion checks
    verify-sandwich      spanning/separating sandwich relations
    verify-variational   metric <= topological cell-wise report
    verify-combinatorics Hamming-ball count vs enumeration
    gamma                bounded-variation diagnostic over the t grid

Exit codes: 0 success, 1 runtime failure (infeasible cover, escape), 2 config
validation failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys as _sys
from dataclasses import dataclass, field as dc_field
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ContractViolationError
from .ergodic import (
    EmpiricalMeasure,
    GridPartition,
    empirical_from_orbit,
    hamming_ball_count,
    hamming_ball_count_exhaustive,
    hamming_ball_rate,
)
from .flow_core import integrate_orbit
from .pressure_metric import (
    PotentialSpec,
    PressureTable,
    bounded_variation_gamma_detail,
    constant_potential,
    katok_check,
    metric_pressure_table,
)
from .pressure_topo import (
    build_compact_sample,
    sandwich_check,
    topo_pressure_table,
    variational_gap,
)
from .systems import get_system, system_names
from .warp import BallVariant, WarpBand, inclusion_check_31

CSV_COLUMNS = "variant,t,eps,delta,value,method,K_id,fill_radius"

_VARIANTS = {v.value: v for v in BallVariant}


class ConfigError(Exception):
    def __init__(self, key: str, msg: str):
        super().__init__(f"config: {key}: {msg}")


# ---------------------------------------------------------------------------
# configuration


@dataclass
class RunConfig:
    raw: dict
    system: object
    potential: PotentialSpec
    variants: list
    t_grid: list
    eps_grid: list
    deltas: list
    dt: float
    pool_size: int
    mode: str
    partition: GridPartition
    tau: float
    n_word: int
    seed: int
    band: WarpBand
    rho_sing: float
    max_points: int
    out: Path
    measure_cfg: dict = dc_field(default_factory=dict)


def _need(cfg: dict, key: str, typ, default=None):
    if key not in cfg:
        if default is not None:
            return default
        raise ConfigError(key, "missing required key")
    val = cfg[key]
    if typ is float and isinstance(val, int):
        val = float(val)
    if not isinstance(val, typ):
        raise ConfigError(key, f"expected {typ}, got {type(val).__name__}")
    return val


def _grid(cfg, key, required=True, default=None):
    g = cfg.get(key, default)
    if g is None:
        if required:
            raise ConfigError(key, "missing required key")
        return []
    if not isinstance(g, list) or not g:
        raise ConfigError(key, "must be a nonempty list")
    vals = [float(v) for v in g]
    if any(b <= a for a, b in zip(vals, vals[1:])):
        raise ConfigError(key, "must be strictly increasing")
    if any(v <= 0 for v in vals):
        raise ConfigError(key, "entries must be positive")
    return vals


def build_potential(sys_info, pcfg: dict) -> PotentialSpec:
    kind = _need(pcfg, "type", str)
    if kind == "constant":
        return constant_potential(_need(pcfg, "c", float, 0.0))
    if kind == "coordinate-sine":
        axis = int(pcfg.get("axis", 0))
        if not 0 <= axis < sys_info.spec.dim:
            raise ConfigError("potential.axis", "axis outside system dimension")
        return PotentialSpec(
            lambda p, a=axis: np.sin(2.0 * np.pi * np.asarray(p)[..., a]),
            f"sin(2*pi*x{axis})",
            0.0,
        )
    if kind == "bump":
        center = np.asarray(_need(pcfg, "center", list), dtype=float)
        radius = _need(pcfg, "radius", float)
        mass = _need(pcfg, "mass", float)
        if radius <= 0:
            raise ConfigError("potential.radius", "must be positive")
        amp = 3.0 * mass / (np.pi * radius**2)
        from .flow_core import distance_many

        def f(p, c=center, r=radius, a=amp, s=sys_info.spec):
            d = distance_many(s, np.asarray(p, dtype=float), c)
            return np.where(d < r, a * (1.0 - d / r), 0.0)

        return PotentialSpec(f, f"bump(r={radius:g},m={mass:g})", mass)
    raise ConfigError("potential.type", f"unknown potential kind {kind!r}")


def load_config(path: str) -> RunConfig:
    try:
        raw = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise ConfigError(path, "config file not found")
    except json.JSONDecodeError as e:
        raise ConfigError(path, f"invalid JSON: {e}")
    scfg = _need(raw, "system", dict)
    name = _need(scfg, "name", str)
    if name not in system_names():
        raise ConfigError("system.name", f"unknown system; choose from {system_names()}")
    sys_info = get_system(name, **scfg.get("params", {}))
    pot = build_potential(sys_info, _need(raw, "potential", dict, {"type": "constant", "c": 0.0}))
    variants = []
    for v in raw.get("variants", ["r1"]):
        if v not in _VARIANTS:
            raise ConfigError("variants", f"unknown variant {v!r}")
        variants.append(_VARIANTS[v])
    t_grid = _grid(raw, "t_grid")
    eps_grid = _grid(raw, "eps_grid")
    deltas = raw.get("delta", [0.1])
    if isinstance(deltas, (int, float)):
        deltas = [float(deltas)]
    if any(not 0 < d < 1 for d in deltas):
        raise ConfigError("delta", "entries must lie in (0, 1)")
    dt = _need(raw, "dt", float)
    if dt <= 0:
        raise ConfigError("dt", "must be positive")
    for t in t_grid:
        if abs(round(t / dt) * dt - t) > 1e-9:
            raise ConfigError("t_grid", f"dt={dt} does not divide t={t}")
    part_cfg = raw.get("partition", {})
    sides = part_cfg.get("boxes_per_side", 4)
    partition = GridPartition(sides, sys_info.spec.dim)
    lam = float(raw.get("lambda", 0.5))
    b = float(raw.get("b", 0.0))
    if not 0 < lam < 1:
        raise ConfigError("lambda", "must lie in (0, 1)")
    return RunConfig(
        raw=raw,
        system=sys_info,
        potential=pot,
        variants=variants,
        t_grid=t_grid,
        eps_grid=eps_grid,
        deltas=[float(d) for d in deltas],
        dt=dt,
        pool_size=int(raw.get("pool_size", 400)),
        mode=raw.get("mode", "greedy"),
        partition=partition,
        tau=float(part_cfg.get("tau", 1.0)),
        n_word=int(part_cfg.get("n", 8)),
        seed=int(raw.get("seed", 0)),
        band=WarpBand(lam, b),
        rho_sing=float(raw.get("rho_sing", 0.1)),
        max_points=int(raw.get("max_points", 64)),
        out=Path(raw.get("out", "out")),
        measure_cfg=raw.get("measure", {}),
    )


# ---------------------------------------------------------------------------
# serialization


def _fmt(v) -> str:
    if isinstance(v, str):
        return v
    return "%.12g" % float(v)


def write_table_csv(path: Path, table: PressureTable):
    lines = [CSV_COLUMNS]
    for r in table.rows:
        lines.append(
            ",".join(
                _fmt(v)
                for v in (r.variant, r.t, r.eps, r.delta, r.value, r.method,
                          r.K_id or "-", r.fill_radius)
            )
        )
    path.write_text("\n".join(lines) + "\n")


def write_rows_csv(path: Path, header: str, rows):
    lines = [header]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n")


def _config_hash(raw: dict) -> str:
    return hashlib.sha256(
        json.dumps(raw, sort_keys=True, separators=(",", ":")).encode()
    ).hexdigest()


def write_report(out: Path, command: str, cfg: RunConfig, payload: dict):
    report = {
        "command": command,
        "provenance": {
            "config_hash": _config_hash(cfg.raw),
            "seed": cfg.seed,
            "version": __version__,
            "config": cfg.raw,
        },
        **payload,
    }
    (out / "report.json").write_text(json.dumps(report, indent=2, default=_json_default) + "\n")


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, BallVariant):
        return o.value
    raise TypeError(type(o))


# ---------------------------------------------------------------------------
# command bodies


def _measure(cfg: RunConfig) -> EmpiricalMeasure:
    m = cfg.measure_cfg
    sysd = cfg.system.spec
    rng = np.random.default_rng(cfg.seed)
    x0 = np.asarray(m["x0"], dtype=float) if "x0" in m else rng.random(sysd.dim)
    if sysd.space == "euclidean-box":
        lo, hi = sysd.box_bounds[:, 0], sysd.box_bounds[:, 1]
        if "x0" not in m:
            x0 = lo + 0.3 * (hi - lo) + 0.02 * (hi - lo) * x0
    T = float(m.get("T", max(200.0, 4.0 * cfg.t_grid[-1])))
    mdt = float(m.get("dt", cfg.dt))
    return empirical_from_orbit(
        sysd, sysd.point(x0), T, mdt,
        burn_in=float(m.get("burn_in", 0.0)), thin=int(m.get("thin", 1)),
    )


def cmd_estimate_metric(cfg: RunConfig, out: Path) -> dict:
    mu = _measure(cfg)
    merged = PressureTable()
    reads = {}
    for variant in cfg.variants:
        for delta in cfg.deltas:
            tab = metric_pressure_table(
                cfg.system.spec, mu, cfg.potential, variant,
                cfg.t_grid, cfg.eps_grid, delta, cfg.dt,
                pool_size=cfg.pool_size, mode=cfg.mode, seed=cfg.seed,
                band=cfg.band,
            )
            merged.rows.extend(tab.rows)
            reads[f"{variant.value},delta={delta:g}"] = tab.read_offs
    write_table_csv(out / "metric_pressure.csv", merged)
    return {"read_offs": reads, "n_atoms": mu.n_atoms}


def _compact_family(cfg: RunConfig):
    rng = np.random.default_rng(cfg.seed + 1)
    sysd = cfg.system.spec
    if sysd.space == "euclidean-box":
        x0 = sysd.box_bounds[:, 0] + 0.3 * (sysd.box_bounds[:, 1] - sysd.box_bounds[:, 0])
        traj = integrate_orbit(sysd, sysd.point(x0), 200.0, cfg.dt)
        cloud = traj.positions[int(20.0 / cfg.dt):]
    else:
        cloud = rng.random((4000, sysd.dim))
    K = build_compact_sample(sysd, cloud, cfg.rho_sing, cfg.max_points, K_id="K0")
    return [K]


def cmd_estimate_topo(cfg: RunConfig, out: Path) -> dict:
    family = _compact_family(cfg)
    merged = PressureTable()
    reads = {}
    for variant in cfg.variants:
        tab = topo_pressure_table(
            cfg.system.spec, family, cfg.potential, variant,
            cfg.t_grid, cfg.eps_grid, cfg.dt, band=cfg.band,
        )
        merged.rows.extend(tab.rows)
        reads[variant.value] = tab.read_offs
    write_table_csv(out / "topo_pressure.csv", merged)
    return {
        "read_offs": reads,
        "K": [{"K_id": K.K_id, "n_points": K.n_points,
               "fill_radius": K.fill_radius} for K in family],
    }


def cmd_verify_katok(cfg: RunConfig, out: Path) -> dict:
    mu = _measure(cfg)
    m = cfg.measure_cfg
    rep = katok_check(
        cfg.system.spec, mu, cfg.potential, cfg.variants[0],
        cfg.t_grid, cfg.eps_grid, cfg.deltas[0], cfg.dt,
        cfg.partition, cfg.tau, cfg.n_word,
        pool_size=cfg.pool_size, mode=cfg.mode, seed=cfg.seed,
        smb_dt=float(m["smb_dt"]) if "smb_dt" in m else None,
    )
    write_table_csv(out / "metric_pressure.csv", rep.table)
    return {
        "metric_read_off": {f"{k:g}": v for k, v in rep.metric_read_off.items()},
        "metric_value": rep.metric_value,
        "smb_entropy": rep.smb_entropy,
        "f_average": rep.f_average,
        "smb_side": rep.smb_side,
        "difference": rep.difference,
        "transport_defect": rep.transport_defect,
    }


def cmd_verify_equivalence(cfg: RunConfig, out: Path) -> dict:
    mu = _measure(cfg)
    merged = PressureTable()
    reads = {}
    for variant in (BallVariant.R1, BallVariant.R2, BallVariant.R3):
        tab = metric_pressure_table(
            cfg.system.spec, mu, cfg.potential, variant,
            cfg.t_grid, cfg.eps_grid, cfg.deltas[0], cfg.dt,
            pool_size=cfg.pool_size, mode=cfg.mode, seed=cfg.seed,
            band=cfg.band,
        )
        merged.rows.extend(tab.rows)
        reads[variant.value] = tab.read_offs
    write_table_csv(out / "variant_tables.csv", merged)
    rng = np.random.default_rng(cfg.seed + 2)
    sysd = cfg.system.spec
    starts = rng.random((24, sysd.dim))
    from .flow_core import singular_distance_many

    starts = starts[singular_distance_many(sysd, starts) > cfg.rho_sing][:16]
    t_pool = cfg.t_grid[0]
    pool = [integrate_orbit(sysd, sysd.point(s), t_pool, cfg.dt) for s in starts]
    incl = inclusion_check_31(
        sysd, pool, eps=cfg.eps_grid[0], lam=cfg.band.lam,
        samples=int(cfg.raw.get("inclusion_samples", 200)), seed=cfg.seed,
    )
    return {
        "read_offs": reads,
        "inclusion": {
            "pairs_checked": incl.pairs_checked,
            "r3_memberships": incl.r3_memberships,
            "r2_memberships": incl.r2_memberships,
            "violations": incl.violations,
        },
    }


def cmd_verify_sandwich(cfg: RunConfig, out: Path) -> dict:
    family = _compact_family(cfg)
    reports = []
    rows = []
    for K in family:
        rep = sandwich_check(
            cfg.system.spec, K, cfg.potential, cfg.t_grid[-1],
            cfg.eps_grid, cfg.dt, band=cfg.band,
        )
        reports.append(rep)
        for c in rep.cells:
            rows.append((K.K_id, cfg.t_grid[-1], c["eps"], c["N1"], c["N2"],
                         c["Z1"], c["Z2"], c["Z1_half"]))
    write_rows_csv(out / "sandwich.csv",
                   "K_id,t,eps,N1,N2,Z1,Z2,Z1_half", rows)
    return {
        "violations": sum(r.violations for r in reports),
        "cells": [r.cells for r in reports],
    }


def cmd_verify_variational(cfg: RunConfig, out: Path) -> dict:
    mu = _measure(cfg)
    K = build_compact_sample(
        cfg.system.spec, mu, cfg.rho_sing, cfg.max_points, K_id="Kmu"
    )
    rep = variational_gap(
        cfg.system.spec, [mu], cfg.potential, K,
        cfg.t_grid, cfg.eps_grid, cfg.deltas[0], cfg.dt, band=cfg.band,
    )
    rows = [(c["measure"], c["t"], c["eps"], c["metric"], c["topo"],
             c["span_mass"], int(c["comparable"])) for c in rep.cells
            if np.isfinite(c["metric"])]
    write_rows_csv(out / "variational.csv",
                   "measure,t,eps,metric_logN,topo_logN,span_mass,comparable", rows)
    return {
        "violations": rep.violations,
        "topo_read_off": {f"{k:g}": v for k, v in rep.topo_read_off.items()},
        "metric_read_offs": [
            {f"{k:g}": v for k, v in d.items()} for d in rep.metric_read_offs
        ],
    }


def cmd_verify_combinatorics(cfg: RunConfig, out: Path) -> dict:
    comb = cfg.raw.get("combinatorics", {})
    Ns = comb.get("N", [3, 4])
    n_max = int(comb.get("n_max", 8))
    rs = comb.get("r", [0.0, 0.25, 0.5, 0.9])
    rows = []
    mismatches = 0
    for N in Ns:
        for n in range(1, n_max + 1):
            for r in rs:
                exact = hamming_ball_count(N, n, r)
                enum = hamming_ball_count_exhaustive(N, n, r)
                match = abs(exact - np.log(enum)) < 1e-9
                mismatches += 0 if match else 1
                rows.append((N, n, r, exact, enum, int(match)))
    write_rows_csv(out / "combinatorics.csv",
                   "N,n,r,log_count,enumerated,match", rows)
    rate_rows = []
    for r in (0.1, 0.25):
        rate_rows.append(
            (3, 4000, r, hamming_ball_count(3, 4000, r) / 4000,
             hamming_ball_rate(3, r))
        )
    write_rows_csv(out / "combinatorics_rate.csv",
                   "N,n,r,log_count_over_n,rate", rate_rows)
    return {"mismatches": mismatches, "rows": len(rows)}


def cmd_gamma(cfg: RunConfig, out: Path) -> dict:
    variant = cfg.variants[0]
    if variant not in (BallVariant.R2, BallVariant.R3):
        variant = BallVariant.R2
    rows = []
    for t in cfg.t_grid:
        for eps in cfg.eps_grid:
            res = bounded_variation_gamma_detail(
                cfg.system.spec, cfg.potential, variant, t, eps, cfg.dt,
                pair_samples=int(cfg.raw.get("gamma", {}).get("pair_samples", 100)),
                seed=cfg.seed, band=cfg.band,
            )
            rows.append((variant.value, t, eps, res.gamma, res.gamma / t,
                         res.pairs_used, int(res.no_admissible_pairs)))
    write_rows_csv(out / "gamma.csv",
                   "variant,t,eps,gamma,gamma_over_t,pairs_used,no_pairs_flag", rows)
    return {"rows": rows}


_COMMANDS = {
    "estimate-metric": cmd_estimate_metric,
    "estimate-topo": cmd_estimate_topo,
    "verify-katok": cmd_verify_katok,
    "verify-equivalence": cmd_verify_equivalence,
    "verify-sandwich": cmd_verify_sandwich,
    "verify-variational": cmd_verify_variational,
    "verify-combinatorics": cmd_verify_combinatorics,
    "gamma": cmd_gamma,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="pressure",
        description="Finite-scale rescaled pressure experiments",
    )
    parser.add_argument("command", choices=sorted(_COMMANDS))
    parser.add_argument("--config", required=True)
    parser.add_argument("--out", default=None)
    parser.add_argument("--threads", type=int, default=1,
                        help="accepted for compatibility; cells run serially")
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config)
    except ConfigError as e:
        print(str(e), file=_sys.stderr)
        return 2
    out = Path(args.out) if args.out else cfg.out
    out.mkdir(parents=True, exist_ok=True)
    try:
        payload = _COMMANDS[args.command](cfg, out)
    except ConfigError as e:
        print(str(e), file=_sys.stderr)
        return 2
    except ContractViolationError as e:
        print(f"config: {e}", file=_sys.stderr)
        return 2
    except Exception as e:
        print(f"runtime failure: {type(e).__name__}: {e}", file=_sys.stderr)
        return 1
    write_report(out, args.command, cfg, payload)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

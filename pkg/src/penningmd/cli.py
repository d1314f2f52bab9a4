"""Command-line interface.

Subcommands: equilibrium, modes, evolve, scan, spectrum.  Configuration comes
from --config FILE (YAML, strict schema) or --recipe NAME (pinned parameter
sets for the headline scenarios); --seed and --out override the file values.
Exit codes: 0 success, 1 compute failure, 2 configuration error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import traceback
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import io
from .config import ConfigError, ExperimentConfig
from .equilibrium import find_equilibrium
from .integrator import Precomputed, RunConfig, run
from .linearized import build_linearized
from .modes import analyze_modes
from .params import beta_from_wall
from .recipes import load_recipe, recipe_names
from .spectra import drumhead_spectrum

LAST_MS = 1e-3


def _load_config(args) -> ExperimentConfig:
    if args.recipe and args.config:
        raise ConfigError("give either --config or --recipe, not both")
    if args.recipe:
        cfg = load_recipe(args.recipe)
    elif args.config:
        cfg = ExperimentConfig.from_file(args.config)
    else:
        raise ConfigError("one of --config or --recipe is required")
    if args.seed is not None:
        cfg.raw["run"]["seed"] = args.seed
    if args.out is not None:
        cfg.raw["outputs"]["directory"] = args.out
    if getattr(args, "points", None) is not None:
        if cfg.raw.get("scan") is None:
            raise ConfigError("--points requires a scan config")
        if "f_list_hz" in cfg.raw["scan"]:
            raise ConfigError("--points cannot override an explicit f_list_hz")
        cfg.raw["scan"]["count"] = args.points
    return cfg


def _outdir(cfg: ExperimentConfig) -> Path:
    path = Path(cfg.raw["outputs"]["directory"])
    path.mkdir(parents=True, exist_ok=True)
    return path


def _meta(cfg: ExperimentConfig, **extra) -> dict:
    return {"config": json.dumps(cfg.raw, sort_keys=True), **extra}


def cmd_equilibrium(cfg: ExperimentConfig) -> int:
    species, trap = cfg.species(), cfg.trap()
    n = cfg.raw["run"]["n_ions"]
    eq = find_equilibrium(n, trap, species)
    out = _outdir(cfg)
    io.write_equilibrium_csv(out / "equilibrium.csv", eq, _meta(cfg))
    print(
        f"equilibrium: N={n} f_wall={trap.omega_r/2/np.pi/1e3:.3f} kHz "
        f"planar={eq.planar} radius={eq.radius*1e6:.2f} um energy={eq.energy:.6e} J"
    )
    print(f"wrote {out / 'equilibrium.csv'}")
    return 0


def cmd_modes(cfg: ExperimentConfig) -> int:
    species, trap = cfg.species(), cfg.trap()
    n = cfg.raw["run"]["n_ions"]
    eq = find_equilibrium(n, trap, species)
    dec = analyze_modes(eq, trap, species)
    out = _outdir(cfg)
    io.write_modes_csv(out / "modes.csv", dec, _meta(cfg))
    io.write_modes_binary(out / "modes_eigvec.bin", dec)
    drum = dec.branch_frequencies("drumhead") / (2 * np.pi)
    exb = dec.branch_frequencies("exb") / (2 * np.pi)
    resonant = drum.min() <= 2.0 * exb.max()
    print(
        f"modes: N={n} [{3*n} modes] min_drumhead={drum.min()/1e3:.2f} kHz "
        f"max_exb={exb.max()/1e3:.2f} kHz resonant={resonant}"
    )
    print(f"wrote {out / 'modes.csv'}, {out / 'modes_eigvec.bin'}")
    return 0


def _evolve_once(cfg: ExperimentConfig, f_wall_hz=None, seed_offset=0, precomputed=None):
    rc = cfg.run_config(f_wall_hz=f_wall_hz, seed_offset=seed_offset)
    pre = precomputed
    if pre is None:
        eq = find_equilibrium(rc.n_ions, rc.trap, rc.species)
        pre = Precomputed(equilibrium=eq)
        if rc.coulomb_mode == "linearized":
            pre.linearized = build_linearized(eq, rc.trap, rc.species)
    return run(rc, pre), rc


def cmd_evolve(cfg: ExperimentConfig) -> int:
    out = _outdir(cfg)
    o = cfg.raw["outputs"]
    ps = cfg.raw["run"]["psd"]
    result, rc = _evolve_once(cfg)
    meta = _meta(cfg, f_wall_hz=rc.trap.omega_r / 2 / np.pi, seed=rc.rng_seed)
    io.write_diagnostics_csv(out / "diagnostics.csv", result.series, meta)
    written = ["diagnostics.csv"]
    if o["equilibrium"]:
        io.write_equilibrium_csv(out / "equilibrium.csv", result.equilibrium, meta)
        written.append("equilibrium.csv")
    if o["modes"]:
        dec = result.decomposition or analyze_modes(
            result.equilibrium, rc.trap, rc.species
        )
        io.write_modes_csv(out / "modes.csv", dec, meta)
        io.write_modes_binary(out / "modes_eigvec.bin", dec)
        written += ["modes.csv", "modes_eigvec.bin"]

    tail = None
    if o["trajectory"] or ps["enabled"]:
        acq = RunConfig(
            n_ions=rc.n_ions,
            trap=rc.trap,
            species=rc.species,
            t_final=ps["duration_s"],
            initial_state=result.final_state,
            coulomb_mode=rc.coulomb_mode,
            cooling=None if ps["lasers_off"] else rc.cooling,
            dt=rc.dt,
            sample_interval=max(rc.sample_interval, 1e-5),
            rng_seed=rc.rng_seed + 1,
            branch_temps="off",
            record_z_dt=ps["sample_dt_s"] if ps["enabled"] else o["trajectory_sample_dt_s"],
        )
        lin = None
        if rc.coulomb_mode == "linearized":
            lin = build_linearized(result.equilibrium, rc.trap, rc.species)
        tail = run(acq, Precomputed(equilibrium=result.equilibrium, linearized=lin))
        if o["trajectory"]:
            io.write_trajectory_binary(
                out / "trajectory.bin", tail.z_record, tail.z_record_dt, kind=1
            )
            written.append("trajectory.bin")
        if ps["enabled"]:
            spec = drumhead_spectrum(
                tail.z_record, tail.z_record_dt, segments=ps["segments"]
            )
            io.write_psd_csv(out / "psd.csv", spec, meta)
            written.append("psd.csv")

    s = result.series
    print(
        f"evolve: N={rc.n_ions} t={s.times[-1]*1e3:.3f} ms "
        f"KEperp={s.ke_perp[-1]*1e3:.3f} KEpar={s.ke_par[-1]*1e3:.3f} "
        f"PE={s.pe[-1]*1e3:.3f} mK reconfigured={s.reconfigured}"
    )
    print("wrote " + ", ".join(str(out / w) for w in written))
    return 0


def _last_ms_mean(times, values, window=LAST_MS):
    mask = times >= times[-1] - window * (1 + 1e-9)
    return float(np.nanmean(values[mask]))


def _scan_point(payload):
    raw, f_wall_hz, index = payload
    cfg = ExperimentConfig(raw=raw)
    base = int(cfg.raw["run"]["seed"])
    derived = int(np.random.SeedSequence([base, index]).generate_state(1)[0])
    # the recorded seed reproduces the row via `evolve --seed <seed>` at this f_wall
    seed = base + derived
    try:
        result, rc = _evolve_once(cfg, f_wall_hz=f_wall_hz, seed_offset=derived)
        s = result.series
        beta = beta_from_wall(rc.trap, rc.species)
        return {
            "index": index,
            "f_wall_hz": f_wall_hz,
            "beta": beta,
            "delta": rc.trap.delta,
            "seed": seed,
            "status": "ok",
            "ke_par_last_ms_mk": _last_ms_mean(s.times, s.ke_par) * 1e3,
            "ke_perp_last_ms_mk": _last_ms_mean(s.times, s.ke_perp) * 1e3,
            "pe_last_ms_mk": _last_ms_mean(s.times, s.pe) * 1e3,
            "reconfigured": s.reconfigured,
            "times": s.times,
            "ke_par": s.ke_par,
            "ke_perp": s.ke_perp,
            "pe": s.pe,
        }
    except Exception as exc:  # per-row failure policy: record, keep scanning
        return {
            "index": index,
            "f_wall_hz": f_wall_hz,
            "beta": np.nan,
            "delta": np.nan,
            "seed": seed,
            "status": f"failed: {type(exc).__name__}: {exc}",
            "ke_par_last_ms_mk": np.nan,
            "ke_perp_last_ms_mk": np.nan,
            "pe_last_ms_mk": np.nan,
            "reconfigured": False,
        }


def cmd_scan(cfg: ExperimentConfig, jobs: int) -> int:
    freqs = cfg.scan_frequencies()
    if freqs is None:
        raise ConfigError("scan section missing from config")
    out = _outdir(cfg)
    payloads = [(cfg.raw, float(f), i) for i, f in enumerate(freqs)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_scan_point, payloads))
    else:
        rows = [_scan_point(p) for p in payloads]
    rows.sort(key=lambda r: r["index"])
    ok = [r for r in rows if r["status"] == "ok"]
    if cfg.raw["outputs"]["diagnostics"]:
        for r in ok:
            io.write_csv(
                out / f"scan_point_{r['index']:03d}.csv",
                {
                    "t_s": r["times"],
                    "ke_perp_mk": r["ke_perp"] * 1e3,
                    "ke_par_mk": r["ke_par"] * 1e3,
                    "pe_mk": r["pe"] * 1e3,
                },
                {"f_wall_hz": r["f_wall_hz"], "seed": r["seed"]},
            )
    io.write_csv(
        out / "scan.csv",
        {
            "index": np.array([r["index"] for r in rows]),
            "f_wall_hz": np.array([r["f_wall_hz"] for r in rows]),
            "beta": np.array([r["beta"] for r in rows]),
            "delta": np.array([r["delta"] for r in rows]),
            "seed": np.array([r["seed"] for r in rows]),
            "ke_par_last_ms_mk": np.array([r["ke_par_last_ms_mk"] for r in rows]),
            "ke_perp_last_ms_mk": np.array([r["ke_perp_last_ms_mk"] for r in rows]),
            "pe_last_ms_mk": np.array([r["pe_last_ms_mk"] for r in rows]),
            "reconfigured": np.array([r["reconfigured"] for r in rows]),
            "status": np.array([r["status"] for r in rows], dtype=object),
        },
        _meta(cfg),
    )
    for r in rows:
        print(
            f"  f={r['f_wall_hz']/1e3:8.3f} kHz  KEpar={r['ke_par_last_ms_mk']:7.3f} "
            f"KEperp={r['ke_perp_last_ms_mk']:7.3f} PE={r['pe_last_ms_mk']:7.3f} mK  {r['status']}"
        )
    print(f"wrote {out / 'scan.csv'}")
    if not ok:
        print("scan: every point failed", file=sys.stderr)
        return 1
    return 0


def cmd_spectrum(args) -> int:
    data, dt_sample, kind = io.read_trajectory_binary(args.traj)
    z = data if kind == 1 else data[:, :, 2]
    spec = drumhead_spectrum(z, dt_sample, segments=args.segments)
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    io.write_psd_csv(out / "psd.csv", spec, {"source": str(args.traj)})
    print(f"wrote {out / 'psd.csv'} ({len(spec.frequencies)} bins)")
    return 0


def _add_common(p, scan=False):
    p.add_argument("--config", help="YAML config file")
    p.add_argument("--recipe", help=f"named recipe: {', '.join(recipe_names())}")
    p.add_argument("--out", help="output directory (overrides config)")
    p.add_argument("--seed", type=int, help="master RNG seed (overrides config)")
    if scan:
        p.add_argument("--jobs", type=int, default=os.cpu_count() or 1,
                       help="parallel scan workers")
        p.add_argument("--points", type=int, help="override scan point count")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="penningmd",
        description="Planar Penning-trap ion crystal dynamics and laser cooling",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    _add_common(sub.add_parser("equilibrium", help="solve the crystal equilibrium"))
    _add_common(sub.add_parser("modes", help="normal-mode table and eigenvectors"))
    _add_common(sub.add_parser("evolve", help="time evolution with diagnostics"))
    _add_common(sub.add_parser("scan", help="wall-frequency scan"), scan=True)
    sp = sub.add_parser("spectrum", help="PSD from a trajectory binary")
    sp.add_argument("--traj", required=True, help="trajectory .bin file")
    sp.add_argument("--out", help="output directory")
    sp.add_argument("--segments", type=int, default=4)

    args = parser.parse_args(argv)
    try:
        if args.command == "spectrum":
            return cmd_spectrum(args)
        cfg = _load_config(args)
        if args.command == "equilibrium":
            return cmd_equilibrium(cfg)
        if args.command == "modes":
            return cmd_modes(cfg)
        if args.command == "evolve":
            return cmd_evolve(cfg)
        if args.command == "scan":
            return cmd_scan(cfg, args.jobs)
        raise ConfigError(f"unknown command {args.command}")
    except (ConfigError, KeyError, FileNotFoundError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        traceback.print_exc()
        return 1


if __name__ == "__main__":
    sys.exit(main())

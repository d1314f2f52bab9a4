#!/usr/bin/env python3
"""Step-cost benchmark for the compiled integrator loops."""

import time

import numpy as np

from penningmd import (
    Precomputed,
    RunConfig,
    ThermalBranches,
    analyze_modes,
    build_linearized,
    default_nist_params,
    find_equilibrium,
    nist_beam_set,
    run,
    with_wall_frequency,
)


def bench(n, mode, cooled, t_final=50e-6):
    species, trap = default_nist_params()
    t = with_wall_frequency(trap, species, 2 * np.pi * 204e3, 0.25)
    eq = find_equilibrium(n, t, species)
    dec = analyze_modes(eq, t, species)
    lin = build_linearized(eq, t, species) if mode == "linearized" else None
    cfg = RunConfig(
        n_ions=n, trap=t, species=species, t_final=t_final,
        initial_state=ThermalBranches(1e-3, 1e-3, 1e-3, seed=0),
        coulomb_mode=mode,
        cooling=nist_beam_set(species) if cooled else None,
        branch_temps="off",
    )
    pre = Precomputed(equilibrium=eq, decomposition=dec, linearized=lin)
    run(cfg, pre)  # warm
    t0 = time.perf_counter()
    run(cfg, pre)
    per_step = (time.perf_counter() - t0) / cfg.total_steps
    label = f"N={n:4d} {mode:10s} cooled={cooled}"
    print(f"{label}: {per_step*1e6:6.2f} us/step -> 10 ms run in "
          f"{per_step*1e7/60:5.1f} min")


if __name__ == "__main__":
    for n in (54, 100):
        bench(n, "full", False)
        bench(n, "full", True)
        bench(n, "linearized", False)

"""Time evolution with magnetized dynamics, optional Doppler cooling, and
optional linearized Coulomb forces; records the rotating-frame energy
diagnostics KE_perp, KE_par and PE (paper convention: each divided by N kB and
quoted in kelvin, so an equilibrated oscillator branch at temperature T reads
T/2 in the kinetic channels).

One step is the symmetric splitting
    half electric kick | exact magnetic rotation + arc drift | half electric kick
which is second order with synchronized positions and velocities and conserves
the rotating-frame energy to bounded oscillations over 1e7-step runs.  The
electric force at the new positions is reused as the next step's first kick,
so each step costs one force evaluation.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
from scipy import constants
from scipy.optimize import linear_sum_assignment
from scipy.spatial.distance import cdist

from . import _kernels, forces
from .equilibrium import EquilibriumConfig, find_equilibrium
from .lasers import CoolingConfig, beam_arrays
from .linearized import LinearizedCoulomb, build_linearized
from .modes import ModeDecomposition, analyze_modes, synthesize_thermal_state, BranchTemperatures
from .params import CrystalState, SpeciesParams, TrapParams, UnitSystem, confinement_beta

MAX_CYCLOTRON_PHASE = 0.1  # omega_c * dt bound
ENERGY_SANITY_BOUND = constants.k * 1.0


@dataclass(frozen=True)
class ThermalBranches:
    """Thermal initial condition: every mode of a branch at k_B T, random phases."""

    t_drumhead: float
    t_exb: float
    t_cyclotron: float
    seed: int = 0


@dataclass
class RunConfig:
    n_ions: int
    trap: TrapParams
    species: SpeciesParams
    t_final: float
    initial_state: Union[ThermalBranches, CrystalState]
    coulomb_mode: str = "full"
    cooling: Optional[CoolingConfig] = None
    dt: float = 1e-9
    sample_interval: float = 1e-6
    rng_seed: int = 0
    branch_temps: str = "auto"  # auto | on | off
    record_z_dt: Optional[float] = None
    equilibrium_seeds: int = 8

    def __post_init__(self):
        omega_c = self.species.cyclotron_frequency(self.trap.b_field)
        if omega_c * self.dt > MAX_CYCLOTRON_PHASE * (1 + 1e-12):
            raise ValueError(
                f"dt does not resolve the cyclotron period: omega_c*dt = {omega_c*self.dt:.3g}"
            )
        if self.sample_interval < self.dt:
            raise ValueError("sample_interval must be >= dt")
        if self.coulomb_mode not in ("full", "linearized"):
            raise ValueError("coulomb_mode must be 'full' or 'linearized'")
        if self.branch_temps not in ("auto", "on", "off"):
            raise ValueError("branch_temps must be auto, on, or off")
        if self.cooling is not None:
            self.cooling.validate_timestep(self.species, self.dt)
        if self.record_z_dt is not None:
            k = self.record_z_dt / self.dt
            if abs(k - round(k)) > 1e-9 or round(k) < 1:
                raise ValueError("record_z_dt must be an integer multiple of dt")

    @property
    def steps_per_sample(self) -> int:
        k = self.sample_interval / self.dt
        if abs(k - round(k)) > 1e-9:
            raise ValueError("sample_interval must be an integer multiple of dt")
        return int(round(k))

    @property
    def total_steps(self) -> int:
        return int(round(self.t_final / self.dt))

    @property
    def want_branch_temps(self) -> bool:
        if self.branch_temps == "on":
            return True
        if self.branch_temps == "off":
            return False
        return self.coulomb_mode == "linearized"


@dataclass
class DiagnosticsSeries:
    """Sampled time series (temperature units, K).  Branch temperatures are
    NaN where unavailable (not requested, or after a reconfiguration trip)."""

    times: np.ndarray
    ke_perp: np.ndarray
    ke_par: np.ndarray
    pe: np.ndarray
    t_drumhead: np.ndarray
    t_exb: np.ndarray
    t_cyclotron: np.ndarray
    event_rate: np.ndarray
    reconfigured: bool = False
    reconfig_time: Optional[float] = None


@dataclass
class Precomputed:
    equilibrium: Optional[EquilibriumConfig] = None
    decomposition: Optional[ModeDecomposition] = None
    linearized: Optional[LinearizedCoulomb] = None


@dataclass
class RunResult:
    series: DiagnosticsSeries
    final_state: CrystalState
    equilibrium: EquilibriumConfig
    decomposition: Optional[ModeDecomposition]
    z_record: Optional[np.ndarray]  # (samples, N) lab-frame z [m]
    z_record_dt: Optional[float]
    total_events: int = 0


def _mixed_seed(*parts) -> int:
    return int(np.random.SeedSequence([int(p) & 0xFFFFFFFF for p in parts]).generate_state(1, dtype=np.uint64)[0])


_EMPTY = np.zeros(0)
_EMPTY2 = np.zeros((0, 3))
_EMPTY_I = np.zeros(0, dtype=np.int64)


def _laser_args(cfg: RunConfig, units: UnitSystem):
    """Beam arrays rescaled to dimensionless kernel units."""
    if cfg.cooling is None or not cfg.cooling.beams:
        gamma = 0.0
        return (gamma, _EMPTY2, _EMPTY, _EMPTY, _EMPTY, _EMPTY_I, _EMPTY, _EMPTY,
                _EMPTY2, _EMPTY)
    dirs, kvec, det, speak, kind, waist, offset, offaxis, recoil = beam_arrays(
        cfg.cooling, cfg.species
    )
    w = cfg.trap.omega_z
    return (
        cfg.species.natural_linewidth / w,
        dirs,
        kvec * units.length_scale,
        det / w,
        speak,
        kind,
        waist / units.length_scale,
        offset / units.length_scale,
        offaxis,
        recoil / units.velocity_scale,
    )


def _force_args(
    coulomb_mode: str,
    trap: TrapParams,
    species: SpeciesParams,
    units: UnitSystem,
    lin: Optional[LinearizedCoulomb],
):
    if coulomb_mode == "full":
        return True, np.zeros((1, 1)), np.zeros(1), np.zeros(1)
    scale_h = species.mass * trap.omega_z**2
    hlin = np.ascontiguousarray(lin.hessian / scale_h)
    jlin = lin.jacobian / units.force_scale
    eqflat = units.length_to_internal(lin.equilibrium.positions_rot).T.ravel().copy()
    return False, hlin, jlin, eqflat


def step(state: CrystalState, field: forces.ForceField, dt: float) -> CrystalState:
    """One integrator step on a lab-frame state (no scattering)."""
    units = UnitSystem.from_params(field.species, field.trap)
    omega_c = field.species.cyclotron_frequency(field.trap.b_field)
    pos = units.length_to_internal(state.positions)
    vel = units.velocity_to_internal(state.velocities)
    n = state.n_ions
    full, hlin, jlin, eqflat = _force_args(
        field.coulomb_mode, field.trap, field.species, units, field.linearized
    )
    acc = np.empty((n, 3))
    qbuf = np.empty(3 * n)
    rates = np.empty((n, 0))
    rng = _kernels.new_rng_state(0)
    _kernels.advance(
        pos, vel, units.time_to_internal(state.time), 1, dt * field.trap.omega_z,
        omega_c / field.trap.omega_z, field.trap.omega_r / field.trap.omega_z,
        field.trap.delta, full, hlin, jlin, eqflat,
        0.0, _EMPTY2, _EMPTY, _EMPTY, _EMPTY, _EMPTY_I, _EMPTY, _EMPTY, _EMPTY2, _EMPTY,
        rng, np.zeros((0, n)), 0, 0, 0, acc, qbuf, rates,
    )
    if not (np.all(np.isfinite(pos)) and np.all(np.isfinite(vel))):
        raise FloatingPointError("integrator produced non-finite state")
    return CrystalState(
        time=state.time + dt,
        positions=units.length_to_si(pos),
        velocities=units.velocity_to_si(vel),
    )


def trajectory(
    state: CrystalState,
    field: forces.ForceField,
    dt: float,
    n_steps: int,
    sample_every: int = 1,
) -> tuple[np.ndarray, np.ndarray]:
    """Integrate and record positions every ``sample_every`` steps (no lasers).

    Returns (times [s], positions [samples, N, 3]); intended for oracle-style
    tests and quick looks, not production runs.
    """
    units = UnitSystem.from_params(field.species, field.trap)
    omega_c = field.species.cyclotron_frequency(field.trap.b_field)
    pos = units.length_to_internal(state.positions)
    vel = units.velocity_to_internal(state.velocities)
    n = state.n_ions
    full, hlin, jlin, eqflat = _force_args(
        field.coulomb_mode, field.trap, field.species, units, field.linearized
    )
    acc = np.empty((n, 3))
    qbuf = np.empty(3 * n)
    rates = np.empty((n, 0))
    rng = _kernels.new_rng_state(0)
    dt_u = dt * field.trap.omega_z
    t0_u = units.time_to_internal(state.time)
    n_samples = n_steps // sample_every
    out = np.empty((n_samples, n, 3))
    times = np.empty(n_samples)
    for k in range(n_samples):
        _kernels.advance(
            pos, vel, t0_u + k * sample_every * dt_u, sample_every, dt_u,
            omega_c / field.trap.omega_z, field.trap.omega_r / field.trap.omega_z,
            field.trap.delta, full, hlin, jlin, eqflat,
            0.0, _EMPTY2, _EMPTY, _EMPTY, _EMPTY, _EMPTY_I, _EMPTY, _EMPTY, _EMPTY2,
            _EMPTY, rng, np.zeros((0, n)), 0, 0, 0, acc, qbuf, rates,
        )
        out[k] = units.length_to_si(pos)
        times[k] = (t0_u + (k + 1) * sample_every * dt_u) * units.time_scale
    return times, out


def run(cfg: RunConfig, precomputed: Optional[Precomputed] = None) -> RunResult:
    """Evolve per the config and sample diagnostics every sample_interval.

    The equilibrium (and, when needed, mode decomposition and linearized
    Coulomb data) are computed up front; PE is measured relative to the
    equilibrium energy in the rotating frame.  Branch temperatures stop being
    reported once the reconfiguration detector trips (a rotating-frame
    displacement above half the minimum equilibrium spacing, or a single mode
    energy above 1 K x kB).
    """
    pre = precomputed or Precomputed()
    trap, species = cfg.trap, cfg.species
    beta = confinement_beta(trap, species)
    units = UnitSystem.from_params(species, trap)
    n = cfg.n_ions

    eq = pre.equilibrium
    if eq is None:
        eq = find_equilibrium(n, trap, species, seeds=cfg.equilibrium_seeds)
    if eq.n_ions != n:
        raise ValueError("precomputed equilibrium does not match n_ions")

    need_modes = isinstance(cfg.initial_state, ThermalBranches) or cfg.want_branch_temps
    dec = pre.decomposition
    if dec is None and need_modes:
        dec = analyze_modes(eq, trap, species)

    lin = pre.linearized
    if cfg.coulomb_mode == "linearized" and lin is None:
        lin = build_linearized(eq, trap, species)

    if isinstance(cfg.initial_state, ThermalBranches):
        tb = cfg.initial_state
        state0 = synthesize_thermal_state(
            eq, dec,
            BranchTemperatures(tb.t_drumhead, tb.t_exb, tb.t_cyclotron),
            rng_seed=_mixed_seed(cfg.rng_seed, tb.seed, 1),
        )
    else:
        state0 = cfg.initial_state

    pos = units.length_to_internal(state0.positions)
    vel = units.velocity_to_internal(state0.velocities)
    eq_pos_u = units.length_to_internal(eq.positions_rot)
    e_eq_u = forces.rotating_energy_u(eq_pos_u, beta, trap.delta)
    # a completed shell slide leaves identity-label displacements at or above
    # the full lattice spacing; harmonic motion at the temperatures of
    # interest never does, so this threshold cannot misfire on vibrations
    remap_threshold = eq.min_spacing() / units.length_scale

    dt_u = cfg.dt * trap.omega_z
    t0_u = units.time_to_internal(state0.time)
    omega_c = species.cyclotron_frequency(trap.b_field)
    wc_u = omega_c / trap.omega_z
    wr_u = trap.omega_r / trap.omega_z

    full, hlin, jlin, eqflat = _force_args(cfg.coulomb_mode, trap, species, units, lin)
    laser = _laser_args(cfg, units)
    rng = _kernels.new_rng_state(
        _mixed_seed(cfg.rng_seed, cfg.cooling.rng_seed if cfg.cooling else 0, 2)
    )

    total = cfg.total_steps
    per = min(cfg.steps_per_sample, max(total, 1))
    zevery = 0
    zbuf = np.zeros((0, n))
    if cfg.record_z_dt is not None:
        zevery = int(round(cfg.record_z_dt / cfg.dt))
        zbuf = np.empty((total // zevery + 1, n))

    acc = np.empty((n, 3))
    qbuf = np.empty(3 * n)
    rates = np.empty((n, len(cfg.cooling.beams) if cfg.cooling else 0))

    n_samples = total // per + 1
    times = np.empty(n_samples)
    ke_perp = np.empty(n_samples)
    ke_par = np.empty(n_samples)
    pe = np.empty(n_samples)
    tdr = np.full(n_samples, np.nan)
    tex = np.full(n_samples, np.nan)
    tcy = np.full(n_samples, np.nan)
    evr = np.zeros(n_samples)

    want_temps = cfg.want_branch_temps and dec is not None
    reconfigured = False
    reconfig_time = None
    bad_streak = 0
    BAD_STREAK_LIMIT = 50  # samples; brief slide transients recover, real failures persist
    kb = constants.k
    e_scale = units.energy_scale
    sanity_u = ENERGY_SANITY_BOUND / e_scale

    def sample(idx, step_count, events):
        nonlocal reconfigured, reconfig_time, bad_streak
        t_u = t0_u + step_count * dt_u
        t_si = t_u * units.time_scale
        theta = wr_u * t_u
        c, s = np.cos(theta), np.sin(theta)
        xr = c * pos[:, 0] - s * pos[:, 1]
        yr = s * pos[:, 0] + c * pos[:, 1]
        vxr = c * vel[:, 0] - s * vel[:, 1] - wr_u * yr
        vyr = s * vel[:, 0] + c * vel[:, 1] + wr_u * xr
        pos_rot = np.column_stack([xr, yr, pos[:, 2]])
        times[idx] = t_si
        ke_perp[idx] = 0.5 * np.sum(vxr**2 + vyr**2) * e_scale / (n * kb)
        ke_par[idx] = 0.5 * np.sum(vel[:, 2] ** 2) * e_scale / (n * kb)
        pe[idx] = (forces.rotating_energy_u(pos_rot, beta, trap.delta) - e_eq_u) * e_scale / (n * kb)
        evr[idx] = events / cfg.sample_interval
        if want_temps and not reconfigured:
            new_streak = 0
            vel_rot = np.column_stack([vxr, vyr, vel[:, 2]])
            disp = pos_rot - eq_pos_u
            if n > 1 and np.max(np.linalg.norm(disp, axis=1)) > remap_threshold:
                # ion labels have traded sites (shell slide between identical
                # configurations); re-anchor by minimum-cost assignment
                dmat = cdist(pos_rot, eq_pos_u)
                _, assign = linear_sum_assignment(dmat**2)
                inv = np.empty(n, dtype=int)
                inv[assign] = np.arange(n)
                disp = pos_rot[inv] - eq_pos_u
                vel_rot = vel_rot[inv]
            q_u = disp.T.ravel()
            v_u = vel_rot.T.ravel()
            e_modes = np.abs(dec.amplitudes(q_u, v_u)) ** 2
            if np.max(e_modes) > sanity_u:
                # leave this sample NaN; only a persistent violation means the
                # crystal truly left the analyzed configuration
                new_streak = bad_streak + 1
                if new_streak >= BAD_STREAK_LIMIT:
                    reconfigured = True
                    reconfig_time = t_si
            else:
                for b_name, arr in ((
                    "drumhead", tdr), ("exb", tex), ("cyclotron", tcy)):
                    arr[idx] = np.mean(e_modes[dec.branch == b_name]) * e_scale / kb
            bad_streak = new_streak

    sample(0, 0, 0)
    done = 0
    idx = 1
    zfill = 0
    total_events = 0
    while done < total:
        nsteps = min(per, total - done)
        zfill, nev = _kernels.advance(
            pos, vel, t0_u + done * dt_u, nsteps, dt_u, wc_u, wr_u, trap.delta,
            full, hlin, jlin, eqflat, *laser,
            rng, zbuf, zevery, zfill, done, acc, qbuf, rates,
        )
        done += nsteps
        total_events += nev
        if not (np.all(np.isfinite(pos)) and np.all(np.isfinite(vel))):
            bad = int(np.sum(~np.isfinite(pos)) + np.sum(~np.isfinite(vel)))
            raise FloatingPointError(
                f"non-finite state at t = {(t0_u + done * dt_u) * units.time_scale:.3e} s "
                f"({bad} entries; last finite max |x'| = "
                f"{np.nanmax(np.abs(pos)) * units.length_scale:.3e} m, "
                f"max |v| = {np.nanmax(np.abs(vel)) * units.velocity_scale:.3e} m/s)"
            )
        if done % per == 0 or done == total:
            sample(idx, done, nev)
            idx += 1

    series = DiagnosticsSeries(
        times=times[:idx], ke_perp=ke_perp[:idx], ke_par=ke_par[:idx], pe=pe[:idx],
        t_drumhead=tdr[:idx], t_exb=tex[:idx], t_cyclotron=tcy[:idx],
        event_rate=evr[:idx], reconfigured=reconfigured, reconfig_time=reconfig_time,
    )
    final_state = CrystalState(
        time=(t0_u + total * dt_u) * units.time_scale,
        positions=units.length_to_si(pos),
        velocities=units.velocity_to_si(vel),
    )
    return RunResult(
        series=series,
        final_state=final_state,
        equilibrium=eq,
        decomposition=dec,
        z_record=zbuf[:zfill] * units.length_scale if zevery else None,
        z_record_dt=cfg.record_z_dt,
        total_events=total_events,
    )

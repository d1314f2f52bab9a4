"""Stochastic Doppler-cooling model: per-step photon scattering.

Each beam scatters each ion per timestep with probability rate*dt, where the
rate is the saturated two-level Lorentzian

    rate = (gamma0/2) S(r) / (1 + S(r) + (2 (Delta - k dhat.v)/gamma0)^2)

with the local saturation S(r) from the beam profile and the Doppler shift
from the full lab-frame velocity (including the crystal rotation, which is
what makes the offset planar beam both cool and torque the crystal).  A
scatter applies the absorption kick hbar k along the beam plus an isotropic
emission recoil of the same magnitude.

Randomness comes from a splitmix64 stream (see _kernels) so that runs are
bit-reproducible for a given seed and the same generator can be used inside
the compiled integrator loop.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import constants

from . import _kernels
from .params import CrystalState, SpeciesParams

MAX_SCATTER_PROBABILITY = 0.1


@dataclass(frozen=True)
class GaussianProfile:
    """Saturation S = peak * exp(-2 u^2 / waist^2), u = r . offset_axis - offset."""

    waist: float
    offset_axis: tuple[float, float, float]
    offset: float

    def __post_init__(self):
        if not self.waist > 0:
            raise ValueError("waist must be positive")
        ax = np.asarray(self.offset_axis, dtype=float)
        if not np.isclose(np.linalg.norm(ax), 1.0, atol=1e-9):
            raise ValueError("offset_axis must be a unit vector")


UNIFORM = "uniform"


@dataclass(frozen=True)
class LaserBeam:
    direction: tuple[float, float, float]
    detuning: float          # rad/s from resonance
    peak_saturation: float
    wavevector: float        # rad/m
    profile: GaussianProfile | str = UNIFORM

    def __post_init__(self):
        d = np.asarray(self.direction, dtype=float)
        if not np.isclose(np.linalg.norm(d), 1.0, atol=1e-9):
            raise ValueError("beam direction must be a unit vector")
        if self.peak_saturation <= 0 or self.wavevector <= 0:
            raise ValueError("peak_saturation and wavevector must be positive")
        if not (self.profile == UNIFORM or isinstance(self.profile, GaussianProfile)):
            raise ValueError("profile must be UNIFORM or a GaussianProfile")

    def saturation(self, position) -> np.ndarray:
        """Local saturation parameter at SI position(s), shape (...,)."""
        pos = np.atleast_2d(np.asarray(position, dtype=float))
        if self.profile == UNIFORM:
            s = np.full(pos.shape[0], self.peak_saturation)
        else:
            u = pos @ np.asarray(self.profile.offset_axis) - self.profile.offset
            s = self.peak_saturation * np.exp(-2.0 * u**2 / self.profile.waist**2)
        return s if s.size > 1 else float(s[0])


@dataclass(frozen=True)
class CoolingConfig:
    beams: tuple[LaserBeam, ...]
    rng_seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "beams", tuple(self.beams))

    def max_rate(self, species: SpeciesParams) -> float:
        """Upper bound on any single-beam rate (Lorentzian peak at S_peak)."""
        g = species.natural_linewidth
        return max(
            0.5 * g * b.peak_saturation / (1.0 + b.peak_saturation) for b in self.beams
        ) if self.beams else 0.0

    def validate_timestep(self, species: SpeciesParams, dt: float):
        p = self.max_rate(species) * dt
        if p > MAX_SCATTER_PROBABILITY:
            raise ValueError(
                f"scatter probability bound violated: max rate*dt = {p:.3g} > "
                f"{MAX_SCATTER_PROBABILITY}; reduce dt or sub-cycle the scattering"
            )


def nist_beam_set(species: SpeciesParams | None = None, rng_seed: int = 0) -> CoolingConfig:
    """The production beam geometry: one offset planar Gaussian beam along +x
    (waist 30 um, offset y0 = 20 um, S = 1, detuning -2pi x 40 MHz) and two
    counter-propagating uniform axial beams (S = 5e-3, detuning -gamma0/2)."""
    if species is None:
        from .params import default_nist_params

        species, _ = default_nist_params()
    k = species.wavevector
    g = species.natural_linewidth
    planar = LaserBeam(
        direction=(1.0, 0.0, 0.0),
        detuning=-2.0 * np.pi * 40e6,
        peak_saturation=1.0,
        wavevector=k,
        profile=GaussianProfile(waist=30e-6, offset_axis=(0.0, 1.0, 0.0), offset=20e-6),
    )
    axial_up = LaserBeam((0.0, 0.0, 1.0), -0.5 * g, 5e-3, k)
    axial_dn = LaserBeam((0.0, 0.0, -1.0), -0.5 * g, 5e-3, k)
    return CoolingConfig(beams=(planar, axial_up, axial_dn), rng_seed=rng_seed)


def scattering_rate(
    beam: LaserBeam, position, velocity, species: SpeciesParams
) -> float | np.ndarray:
    """Photon scattering rate [1/s] for an ion at SI position/velocity."""
    g = species.natural_linewidth
    s = beam.saturation(position)
    vel = np.atleast_2d(np.asarray(velocity, dtype=float))
    doppler = beam.wavevector * (vel @ np.asarray(beam.direction))
    detune = 2.0 * (beam.detuning - doppler) / g
    rate = 0.5 * g * s / (1.0 + s + detune**2)
    return rate if np.size(rate) > 1 else float(np.ravel(rate)[0])


def beam_arrays(cfg: CoolingConfig, species: SpeciesParams):
    """Pack beams into flat arrays for the compiled scatter kernel (SI units)."""
    nb = len(cfg.beams)
    dirs = np.zeros((nb, 3))
    kvec = np.zeros(nb)
    det = np.zeros(nb)
    speak = np.zeros(nb)
    kind = np.zeros(nb, dtype=np.int64)
    waist = np.ones(nb)
    offset = np.zeros(nb)
    offaxis = np.zeros((nb, 3))
    recoil = np.zeros(nb)
    for i, b in enumerate(cfg.beams):
        dirs[i] = b.direction
        kvec[i] = b.wavevector
        det[i] = b.detuning
        speak[i] = b.peak_saturation
        recoil[i] = constants.hbar * b.wavevector / species.mass
        if isinstance(b.profile, GaussianProfile):
            kind[i] = 1
            waist[i] = b.profile.waist
            offset[i] = b.profile.offset
            offaxis[i] = b.profile.offset_axis
    return dirs, kvec, det, speak, kind, waist, offset, offaxis, recoil


class ScatterStream:
    """Seedable splitmix64 stream; the state array can be handed to kernels."""

    def __init__(self, seed: int):
        self.state = _kernels.new_rng_state(int(seed))

    def uniform(self) -> float:
        return _kernels.stream_uniform(self.state)


def apply_scattering(
    state: CrystalState,
    cfg: CoolingConfig,
    species: SpeciesParams,
    dt: float,
    rng: ScatterStream,
):
    """One scattering step on a lab-frame state: returns (velocities, events).

    Rates are evaluated on the frozen input state; each (ion, beam) pair then
    scatters independently in a fixed order.  The per-beam probability bound
    rate*dt <= 0.1 is enforced.  The same compiled routine drives the
    integrator's inner loop.
    """
    cfg.validate_timestep(species, dt)
    vel = state.velocities.copy()
    if not cfg.beams:
        return vel, 0
    arrays = beam_arrays(cfg, species)
    rates = np.empty((state.n_ions, len(cfg.beams)))
    events = _kernels.scatter_step(
        state.positions.copy(), vel, dt, species.natural_linewidth, *arrays,
        rng.state, rates,
    )
    return vel, int(events)

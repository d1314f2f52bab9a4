"""Physical parameters, derived trap quantities, and the internal unit system.

Conventions used throughout the package:

* The magnetic field points along +z and the ions are positively charged, so
  the crystal's collective rotation is clockwise when viewed from +z (angular
  velocity -omega_r * zhat with omega_r > 0).
* ``positions``/``velocities`` arrays are shaped (N, 3) in SI units and live in
  the lab frame unless a name says otherwise.
* All heavy numerics run in a dimensionless unit system (length l0, time
  1/omega_z, mass m); the public API converts at the boundary.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import constants

# Atomic mass of 9Be in u; the electron mass is not subtracted, matching how
# the cyclotron frequency of ~2pi x 7.60 MHz at 4.4588 T is quoted.
BERYLLIUM_9_AMU = 9.012182

COULOMB_CONSTANT = 1.0 / (4.0 * np.pi * constants.epsilon_0)


@dataclass(frozen=True)
class SpeciesParams:
    """Ion species constants: mass [kg], charge [C], cooling transition."""

    mass: float
    charge: float
    transition_wavelength: float
    natural_linewidth: float  # rad/s

    def __post_init__(self):
        for name in ("mass", "charge", "transition_wavelength", "natural_linewidth"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"SpeciesParams.{name} must be strictly positive")

    @property
    def wavevector(self) -> float:
        """Magnitude of the cooling-transition wavevector, rad/m."""
        return 2.0 * np.pi / self.transition_wavelength

    @property
    def doppler_limit(self) -> float:
        """Doppler cooling limit hbar*gamma0/(2 kB), in K."""
        return constants.hbar * self.natural_linewidth / (2.0 * constants.k)

    def cyclotron_frequency(self, b_field: float) -> float:
        return self.charge * b_field / self.mass


@dataclass(frozen=True)
class TrapParams:
    """Trap configuration: field [T], axial frequency, wall frequency [rad/s],
    and the dimensionless wall anisotropy delta."""

    b_field: float
    omega_z: float
    omega_r: float
    delta: float

    def __post_init__(self):
        if not (self.b_field > 0 and self.omega_z > 0 and self.omega_r > 0):
            raise ValueError("b_field, omega_z and omega_r must be strictly positive")
        if self.delta < 0:
            raise ValueError("wall anisotropy delta must be >= 0")


def beta_from_wall(trap: TrapParams, species: SpeciesParams) -> float:
    """Dimensionless planar confinement strength at the configured wall frequency.

    beta = omega_r (omega_c - omega_r) / omega_z^2 - 1/2.  Requires
    0 < omega_r < omega_c; beta > 0 is needed for a radially confined crystal.
    """
    omega_c = species.cyclotron_frequency(trap.b_field)
    if not 0.0 < trap.omega_r < omega_c:
        raise ValueError(
            f"omega_r must lie in (0, omega_c); got omega_r={trap.omega_r:.6g}, "
            f"omega_c={omega_c:.6g}"
        )
    return trap.omega_r * (omega_c - trap.omega_r) / trap.omega_z**2 - 0.5


def confinement_beta(trap: TrapParams, species: SpeciesParams) -> float:
    """beta_from_wall plus the confinement invariant beta > delta >= 0."""
    beta = beta_from_wall(trap, species)
    if not beta > trap.delta:
        raise ValueError(
            f"confinement requires beta > delta; got beta={beta:.6g}, delta={trap.delta:.6g}"
        )
    return beta


def with_wall_frequency(
    trap: TrapParams,
    species: SpeciesParams,
    omega_r: float,
    delta_over_beta: float | None = None,
) -> TrapParams:
    """New TrapParams at a different wall frequency.

    When ``delta_over_beta`` is given, delta is recomputed so the ratio holds at
    the new omega_r (the wall strength tracks beta during scans); otherwise the
    absolute delta is kept.
    """
    if delta_over_beta is None:
        delta = trap.delta
    else:
        probe = TrapParams(trap.b_field, trap.omega_z, omega_r, 0.0)
        delta = delta_over_beta * beta_from_wall(probe, species)
    return TrapParams(trap.b_field, trap.omega_z, omega_r, delta)


def default_nist_params(
    omega_r: float = 2.0 * np.pi * 180e3,
    delta_over_beta: float = 0.25,
) -> tuple[SpeciesParams, TrapParams]:
    """9Be+ in the 4.4588 T / omega_z = 2pi x 1.58 MHz trap.

    delta is set from delta_over_beta at the requested omega_r (default ratio
    0.25), so the crystal aspect ratio is preserved when omega_r changes.
    """
    species = SpeciesParams(
        mass=BERYLLIUM_9_AMU * constants.atomic_mass,
        charge=constants.e,
        transition_wavelength=313e-9,
        natural_linewidth=2.0 * np.pi * 18e6,
    )
    template = TrapParams(4.4588, 2.0 * np.pi * 1.58e6, omega_r, 0.0)
    trap = with_wall_frequency(template, species, omega_r, delta_over_beta)
    confinement_beta(trap, species)
    return species, trap


@dataclass(frozen=True)
class CrystalState:
    """Lab-frame snapshot of the crystal: time [s], positions [m], velocities [m/s]."""

    time: float
    positions: np.ndarray
    velocities: np.ndarray

    def __post_init__(self):
        pos = np.array(self.positions, dtype=float)
        vel = np.array(self.velocities, dtype=float)
        if pos.ndim != 2 or pos.shape[1] != 3 or pos.shape[0] < 1:
            raise ValueError("positions must be (N, 3) with N >= 1")
        if vel.shape != pos.shape:
            raise ValueError("velocities must match positions shape")
        if not (np.all(np.isfinite(pos)) and np.all(np.isfinite(vel))):
            raise ValueError("state contains non-finite entries")
        pos.setflags(write=False)
        vel.setflags(write=False)
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "velocities", vel)

    @property
    def n_ions(self) -> int:
        return self.positions.shape[0]


@dataclass(frozen=True)
class UnitSystem:
    """Dimensionless internal units: l0 = (e^2/(4 pi eps0 m omega_z^2))^(1/3),
    t0 = 1/omega_z, e0 = m omega_z^2 l0^2.

    In these units the ion mass, the axial frequency, and the Coulomb coupling
    e^2/(4 pi eps0) are all equal to 1.
    """

    length_scale: float
    time_scale: float
    energy_scale: float
    mass: float = field(repr=False, default=0.0)

    @classmethod
    def from_params(cls, species: SpeciesParams, trap: TrapParams) -> "UnitSystem":
        l0 = (
            COULOMB_CONSTANT * species.charge**2 / (species.mass * trap.omega_z**2)
        ) ** (1.0 / 3.0)
        return cls(
            length_scale=l0,
            time_scale=1.0 / trap.omega_z,
            energy_scale=species.mass * trap.omega_z**2 * l0**2,
            mass=species.mass,
        )

    @property
    def velocity_scale(self) -> float:
        return self.length_scale / self.time_scale

    @property
    def force_scale(self) -> float:
        return self.energy_scale / self.length_scale

    # SI <-> dimensionless; trivial scalings kept explicit for grep-ability.
    def length_to_internal(self, x):
        return np.asarray(x, dtype=float) / self.length_scale

    def length_to_si(self, x):
        return np.asarray(x, dtype=float) * self.length_scale

    def velocity_to_internal(self, v):
        return np.asarray(v, dtype=float) / self.velocity_scale

    def velocity_to_si(self, v):
        return np.asarray(v, dtype=float) * self.velocity_scale

    def time_to_internal(self, t):
        return t / self.time_scale

    def time_to_si(self, t):
        return t * self.time_scale

    def energy_to_internal(self, e):
        return e / self.energy_scale

    def energy_to_si(self, e):
        return e * self.energy_scale

    def frequency_to_si(self, w):
        return np.asarray(w, dtype=float) / self.time_scale

    def frequency_to_internal(self, w):
        return np.asarray(w, dtype=float) * self.time_scale


def energy_to_temperature(energy: float, n_ions: int) -> float:
    """Convert a per-crystal energy [J] to temperature units: T = E / (N kB)."""
    return energy / (n_ions * constants.k)


def temperature_to_energy(temperature: float, n_ions: int) -> float:
    return temperature * n_ions * constants.k

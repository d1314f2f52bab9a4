"""Exact forces and frame transforms.

Lab frame: static quadrupole 0.5 m omega_z^2 (z^2 - rho^2/2), a delta-strength
quadrupole rotating at the wall frequency, the Lorentz force q v x B, and the
full pairwise Coulomb interaction.

Rotating frame (co-rotating with the crystal, which spins clockwise about +z):
positions transform with R(+omega_r t) applied to (x, y); the potential becomes
static,

    U_r = sum_i 0.5 m omega_z^2 (z_i^2 + (beta+delta) x_i^2 + (beta-delta) y_i^2)
          + pairwise Coulomb,

and the only velocity-dependent force is the workless magnetic-plus-Coriolis
term m (omega_c - 2 omega_r) v' x zhat, so KE' + U_r is conserved.

The ``_u``-suffixed helpers operate on dimensionless quantities (see
params.UnitSystem); everything else takes and returns SI.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, Optional

import numpy as np

from .params import (
    COULOMB_CONSTANT,
    CrystalState,
    SpeciesParams,
    TrapParams,
    UnitSystem,
    confinement_beta,
)

CoulombMode = Literal["full", "linearized"]


# ---------------------------------------------------------------------------
# dimensionless core (m = omega_z = e^2/(4 pi eps0) = 1)
# ---------------------------------------------------------------------------

def pair_separations_u(pos: np.ndarray):
    """Pairwise displacement tensor and distances; raises on coincident ions."""
    diff = pos[:, None, :] - pos[None, :, :]
    dist = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
    n = pos.shape[0]
    off = ~np.eye(n, dtype=bool)
    if np.any(dist[off] == 0.0):
        raise ValueError("coincident ions: invalid configuration")
    return diff, dist

def coulomb_energy_u(pos: np.ndarray) -> float:
    n = pos.shape[0]
    if n < 2:
        return 0.0
    _, dist = pair_separations_u(pos)
    iu = np.triu_indices(n, k=1)
    return float(np.sum(1.0 / dist[iu]))

def coulomb_gradient_u(pos: np.ndarray) -> np.ndarray:
    """Gradient of the dimensionless Coulomb energy, shape (N, 3)."""
    n = pos.shape[0]
    if n < 2:
        return np.zeros_like(pos)
    diff, dist = pair_separations_u(pos)
    np.fill_diagonal(dist, np.inf)
    inv3 = dist**-3
    # dU/dx_i = -sum_j (x_i - x_j)/d^3
    return -np.einsum("ij,ijk->ik", inv3, diff)

def trap_energy_u(pos: np.ndarray, beta: float, delta: float) -> float:
    x, y, z = pos[:, 0], pos[:, 1], pos[:, 2]
    return float(0.5 * np.sum(z**2 + (beta + delta) * x**2 + (beta - delta) * y**2))

def trap_gradient_u(pos: np.ndarray, beta: float, delta: float) -> np.ndarray:
    g = np.empty_like(pos)
    g[:, 0] = (beta + delta) * pos[:, 0]
    g[:, 1] = (beta - delta) * pos[:, 1]
    g[:, 2] = pos[:, 2]
    return g

def rotating_energy_u(pos: np.ndarray, beta: float, delta: float) -> float:
    return trap_energy_u(pos, beta, delta) + coulomb_energy_u(pos)

def rotating_gradient_u(pos: np.ndarray, beta: float, delta: float) -> np.ndarray:
    return trap_gradient_u(pos, beta, delta) + coulomb_gradient_u(pos)


def coulomb_hessian_u(pos: np.ndarray) -> np.ndarray:
    """Coulomb-only Hessian, axis-major layout [x1..xN, y1..yN, z1..zN]."""
    n = pos.shape[0]
    h = np.zeros((3 * n, 3 * n))
    if n < 2:
        return h
    diff, dist = pair_separations_u(pos)
    np.fill_diagonal(dist, np.inf)
    inv3 = dist**-3
    inv5 = dist**-5
    for a in range(3):
        for b in range(3):
            # d^2(1/d)/dxa dxb for the pair term: (3 r_a r_b - delta_ab d^2)/d^5
            blk = 3.0 * diff[:, :, a] * diff[:, :, b] * inv5
            if a == b:
                blk = blk - inv3
            np.fill_diagonal(blk, 0.0)
            off = -blk
            diag = blk.sum(axis=1)
            h[a * n : (a + 1) * n, b * n : (b + 1) * n] = off + np.diag(diag)
    return h


def trap_hessian_diagonal_u(n: int, beta: float, delta: float) -> np.ndarray:
    """Diagonal of the trap part of the rotating-frame Hessian (axis-major)."""
    return np.concatenate(
        [
            np.full(n, beta + delta),
            np.full(n, beta - delta),
            np.ones(n),
        ]
    )


def rotating_hessian_u(pos: np.ndarray, beta: float, delta: float) -> np.ndarray:
    h = coulomb_hessian_u(pos)
    h[np.diag_indices_from(h)] += trap_hessian_diagonal_u(pos.shape[0], beta, delta)
    return h


# ---------------------------------------------------------------------------
# SI API
# ---------------------------------------------------------------------------

def coulomb_potential(positions: np.ndarray, charge: float) -> float:
    """Total Coulomb energy [J] of point charges at ``positions`` [m]."""
    positions = np.asarray(positions, dtype=float)
    return COULOMB_CONSTANT * charge**2 * coulomb_energy_u(positions)

def coulomb_force(positions: np.ndarray, charge: float) -> np.ndarray:
    """Pairwise repulsive Coulomb force [N] on each ion, shape (N, 3)."""
    positions = np.asarray(positions, dtype=float)
    return -COULOMB_CONSTANT * charge**2 * coulomb_gradient_u(positions)


def rotation_matrix(angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s], [s, c]])


def to_rotating_frame(state: CrystalState, omega_r: float):
    """Lab-frame state -> rotating-frame (positions, velocities).

    Planar coordinates are rotated by R(+omega_r t); velocities get the same
    rotation and then the rigid-rotation contribution is removed, so a crystal
    in steady rotation has zero rotating-frame velocity.
    """
    rot = rotation_matrix(omega_r * state.time)
    pos = state.positions.copy()
    vel = state.velocities.copy()
    pos[:, :2] = pos[:, :2] @ rot.T
    vel[:, :2] = vel[:, :2] @ rot.T
    # rigid rotation of the clockwise-spinning crystal maps to -omega_r zhat x x'
    vel[:, 0] += -omega_r * pos[:, 1]
    vel[:, 1] += omega_r * pos[:, 0]
    return pos, vel


def from_rotating_frame(
    positions_rot: np.ndarray,
    velocities_rot: np.ndarray,
    time: float,
    omega_r: float,
) -> CrystalState:
    """Inverse of :func:`to_rotating_frame`."""
    pos = np.array(positions_rot, dtype=float)
    vel = np.array(velocities_rot, dtype=float)
    vel[:, 0] -= -omega_r * pos[:, 1]
    vel[:, 1] -= omega_r * pos[:, 0]
    rot = rotation_matrix(-omega_r * time)
    pos[:, :2] = pos[:, :2] @ rot.T
    vel[:, :2] = vel[:, :2] @ rot.T
    return CrystalState(time=time, positions=pos, velocities=vel)


def rotating_potential_energy(
    positions_rot: np.ndarray, trap: TrapParams, species: SpeciesParams
) -> float:
    """Rotating-frame potential U_r [J] at the given rotating-frame positions [m]."""
    beta = confinement_beta(trap, species)
    units = UnitSystem.from_params(species, trap)
    pos = units.length_to_internal(positions_rot)
    return units.energy_to_si(rotating_energy_u(pos, beta, trap.delta))


def rotating_frame_force(
    positions_rot: np.ndarray, trap: TrapParams, species: SpeciesParams
) -> np.ndarray:
    """-grad U_r [N] in the rotating frame (no velocity-dependent part)."""
    beta = confinement_beta(trap, species)
    units = UnitSystem.from_params(species, trap)
    pos = units.length_to_internal(positions_rot)
    return -units.force_scale * rotating_gradient_u(pos, beta, trap.delta)


@dataclass
class ForceField:
    """Force configuration for the integrator and lab-frame evaluations."""

    trap: TrapParams
    species: SpeciesParams
    coulomb_mode: CoulombMode = "full"
    linearized: Optional[object] = None  # linearized.LinearizedCoulomb

    def __post_init__(self):
        confinement_beta(self.trap, self.species)
        if self.coulomb_mode == "linearized" and self.linearized is None:
            raise ValueError("linearized mode requires an attached LinearizedCoulomb")


def lab_frame_force(state: CrystalState, field: ForceField) -> np.ndarray:
    """Total lab-frame force [N]: trap + rotating wall + Lorentz + Coulomb."""
    trap, species = field.trap, field.species
    m = species.mass
    pos, vel = state.positions, state.velocities
    f = np.zeros_like(pos)

    # static quadrupole: planar defocusing, axial restoring
    f[:, 0] += 0.5 * m * trap.omega_z**2 * pos[:, 0]
    f[:, 1] += 0.5 * m * trap.omega_z**2 * pos[:, 1]
    f[:, 2] -= m * trap.omega_z**2 * pos[:, 2]

    # wall quadrupole, evaluated in the frame rotating with the wall phase
    rot = rotation_matrix(trap.omega_r * state.time)
    xw = pos[:, :2] @ rot.T
    fw = np.column_stack([-xw[:, 0], xw[:, 1]]) * (m * trap.omega_z**2 * trap.delta)
    f[:, :2] += fw @ rot

    # Lorentz q v x B with B along +z
    qb = species.charge * trap.b_field
    f[:, 0] += qb * vel[:, 1]
    f[:, 1] -= qb * vel[:, 0]

    if field.coulomb_mode == "full":
        f += coulomb_force(pos, species.charge)
    else:
        f += field.linearized.force(state)
    return f


def rotating_total_energy(state: CrystalState, trap: TrapParams, species: SpeciesParams) -> float:
    """Conserved rotating-frame energy [J]: kinetic (rotating velocities) + U_r."""
    pos_rot, vel_rot = to_rotating_frame(state, trap.omega_r)
    kinetic = 0.5 * species.mass * float(np.sum(vel_rot**2))
    return kinetic + rotating_potential_energy(pos_rot, trap, species)

"""Linearized Coulomb force: second-order expansion about the rotating-frame
equilibrium, evaluated in the rotating frame and mapped back to the lab.

Replacing only the Coulomb force with F = -J - H q (J, H the Coulomb-only
Jacobian and Hessian at equilibrium) removes every anharmonic term from the
dynamics, since the trap and wall potentials are already quadratic.  Mode
branches then evolve independently: no inter-branch energy exchange and no
crystal reorganization is possible.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import forces
from .equilibrium import EquilibriumConfig
from .params import CrystalState, SpeciesParams, TrapParams, UnitSystem, confinement_beta


@dataclass(frozen=True)
class LinearizedCoulomb:
    """Coulomb-only expansion data at an equilibrium (SI units, axis-major):
    jacobian [N... J/m] is grad U_C, hessian [N/m] its second derivatives."""

    equilibrium: EquilibriumConfig
    jacobian: np.ndarray       # (3N,)
    hessian: np.ndarray        # (3N, 3N)
    trap: TrapParams = field(repr=False, default=None)
    species: SpeciesParams = field(repr=False, default=None)

    @property
    def n_ions(self) -> int:
        return self.equilibrium.n_ions

    def force(self, state: CrystalState) -> np.ndarray:
        return linearized_coulomb_force(state, self)


def build_linearized(
    eq: EquilibriumConfig, trap: TrapParams, species: SpeciesParams
) -> LinearizedCoulomb:
    """Assemble J and the Coulomb-only H at the equilibrium.

    At equilibrium J is exactly the negative of the trap-potential gradient
    (the total gradient vanishes), which is asserted here as a consistency
    check on the converged equilibrium.
    """
    beta = confinement_beta(trap, species)
    units = UnitSystem.from_params(species, trap)
    pos = units.length_to_internal(eq.positions_rot)
    n = eq.n_ions

    jac_u = forces.coulomb_gradient_u(pos).T.ravel()
    trap_grad_u = forces.trap_gradient_u(pos, beta, trap.delta).T.ravel()
    resid = np.max(np.abs(jac_u + trap_grad_u))
    if resid > 1e-8:
        raise ValueError(
            f"equilibrium residual too large for linearization: |J + grad U_trap| = {resid:.3e}"
        )
    hess_u = forces.coulomb_hessian_u(pos)

    force_scale = units.force_scale
    return LinearizedCoulomb(
        equilibrium=eq,
        jacobian=jac_u * force_scale,
        hessian=hess_u * species.mass * trap.omega_z**2,
        trap=trap,
        species=species,
    )


def linearized_coulomb_force(state: CrystalState, lin: LinearizedCoulomb) -> np.ndarray:
    """Lab-frame linearized Coulomb force, shape (N, 3).

    Rotate lab positions into the rotating frame, form displacements from
    equilibrium, evaluate F = -J - H q, and rotate the force vector back.
    """
    n = lin.n_ions
    theta = lin.trap.omega_r * state.time
    rot = forces.rotation_matrix(theta)
    pos_rot = state.positions.copy()
    pos_rot[:, :2] = pos_rot[:, :2] @ rot.T
    q = (pos_rot - lin.equilibrium.positions_rot).T.ravel()  # axis-major
    f_rot_flat = -lin.jacobian - lin.hessian @ q
    f_rot = f_rot_flat.reshape(3, n).T
    f_lab = f_rot.copy()
    f_lab[:, :2] = f_rot[:, :2] @ rot  # inverse rotation of a vector field
    return f_lab

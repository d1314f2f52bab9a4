"""Normal modes of a planar crystal: drumhead (axial), ExB and cyclotron
(planar) branches, mode-energy projection, and thermal state synthesis.

All linear algebra runs in dimensionless units with the axis-major layout
[x1..xN, y1..yN, z1..zN].  The axial problem is a symmetric eigenproblem of
the Hessian's z block.  The planar problem is gyroscopic: the first-order
system d/dt (q, v) = A (q, v) with

    A = [[0, I], [-H_planar, Omega_v G]],   Omega_v = (omega_c - 2 omega_r)/omega_z,

where G v = v x zhat restricted to the plane.  Its eigenvalues come in +-i w
pairs; the N positive frequencies below omega_c/2 are the ExB branch and the N
above are the cyclotron branch.

Every mode is stored as a complex phase-space vector w = (q, v) normalized so
that w^H Q w = 1 with Q = diag(H, I).  Because the quadratic energy
E = (|v|^2 + q^T H q)/2 is conserved by the linear dynamics, eigenvectors of
distinct frequencies are automatically Q-orthogonal, the amplitude of mode k
in a state u = (q, v) is a_k = w_k^H Q u, and sum_k |a_k|^2 equals E exactly.
That partition is the operational definition of per-mode energy used for the
branch temperatures.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import constants, linalg

from . import forces
from .equilibrium import EquilibriumConfig
from .params import CrystalState, SpeciesParams, TrapParams, UnitSystem, confinement_beta

DRUMHEAD = "drumhead"
EXB = "exb"
CYCLOTRON = "cyclotron"

ENERGY_SANITY_BOUND = constants.k * 1.0  # one kelvin per single mode


class ModeError(RuntimeError):
    pass


class ReconfigurationWarning(UserWarning):
    """A projected mode energy is implausibly large: the crystal has likely
    reorganized and displacements from the stored equilibrium are meaningless."""


@dataclass(frozen=True)
class HessianData:
    """Second derivatives of the total rotating-frame potential [N/m],
    axis-major layout, at a planar equilibrium."""

    matrix: np.ndarray
    n_ions: int

    @property
    def planar_block(self) -> np.ndarray:
        return self.matrix[: 2 * self.n_ions, : 2 * self.n_ions]

    @property
    def axial_block(self) -> np.ndarray:
        return self.matrix[2 * self.n_ions :, 2 * self.n_ions :]


@dataclass(frozen=True)
class BranchTemperatures:
    t_drumhead: float
    t_exb: float
    t_cyclotron: float

    def __post_init__(self):
        for name in ("t_drumhead", "t_exb", "t_cyclotron"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")

    def for_branch(self, branch: str) -> float:
        return {DRUMHEAD: self.t_drumhead, EXB: self.t_exb, CYCLOTRON: self.t_cyclotron}[branch]


def total_hessian(eq: EquilibriumConfig, trap: TrapParams, species: SpeciesParams) -> HessianData:
    """Analytic Hessian (trap + Coulomb) at a planar equilibrium, SI units."""
    if not eq.planar:
        raise ModeError("branch classification requires a planar equilibrium")
    beta = confinement_beta(trap, species)
    units = UnitSystem.from_params(species, trap)
    pos = units.length_to_internal(eq.positions_rot)
    h_u = forces.rotating_hessian_u(pos, beta, trap.delta)
    return HessianData(matrix=h_u * species.mass * trap.omega_z**2, n_ions=eq.n_ions)


def drumhead_modes(h: HessianData, species: SpeciesParams):
    """Axial eigenmodes: (frequencies [rad/s] descending, orthonormal vectors).

    The uniform displacement is an exact eigenvector (Coulomb terms cancel in
    the row sums), so the highest frequency is the center-of-mass mode at
    omega_z.  A non-positive eigenvalue means the crystal is past the planar
    stability limit.
    """
    evals, evecs = np.linalg.eigh(h.axial_block / species.mass)
    if evals[0] <= 0.0:
        raise ModeError(
            f"axial Hessian not positive definite (min eigenvalue {evals[0]:.3e}): "
            "past planar stability"
        )
    order = np.argsort(evals)[::-1]
    return np.sqrt(evals[order]), evecs[:, order]


def planar_modes(h: HessianData, trap: TrapParams, species: SpeciesParams):
    """Planar eigenmodes from the 4N first-order system.

    Returns (frequencies [rad/s] ascending, complex eigenvectors (4N, 2N) with
    rows [q_x q_y v_x v_y] per column mode, in SI-consistent scaling q in
    meters and v in m/s over omega_z... the caller normalizes), plus the ExB /
    cyclotron split index.
    """
    n = h.n_ions
    omega_c = species.cyclotron_frequency(trap.b_field)
    hp = h.planar_block / (species.mass * trap.omega_z**2)  # dimensionless
    omega_v = (omega_c - 2.0 * trap.omega_r) / trap.omega_z

    a = np.zeros((4 * n, 4 * n))
    a[: 2 * n, 2 * n :] = np.eye(2 * n)
    a[2 * n :, : 2 * n] = -hp
    # magnetic + Coriolis: v x zhat -> (v_y, -v_x)
    a[2 * n : 3 * n, 3 * n :] = omega_v * np.eye(n)
    a[3 * n :, 2 * n : 3 * n] = -omega_v * np.eye(n)

    evals, evecs = linalg.eig(a)
    scale = np.max(np.abs(evals.imag))
    if np.max(np.abs(evals.real)) > 1e-8 * scale:
        raise ModeError(
            f"planar eigenvalues have real parts (max {np.max(np.abs(evals.real)):.3e} "
            f"vs imag scale {scale:.3e}): unstable or degenerate configuration"
        )
    sel = evals.imag > 0
    freqs_u = evals.imag[sel]
    vecs = evecs[:, sel]
    if freqs_u.size != 2 * n:
        raise ModeError(f"expected {2*n} positive-frequency planar modes, got {freqs_u.size}")
    order = np.argsort(freqs_u)
    freqs_u = freqs_u[order]
    vecs = vecs[:, order]
    if np.min(freqs_u) <= 1e-12:
        raise ModeError("zero-frequency planar mode (delta = 0 with N > 1 is not supported)")
    n_exb = int(np.sum(freqs_u < 0.5 * omega_c / trap.omega_z))
    if n_exb != n:
        raise ModeError(
            f"branch separation at omega_c/2 failed: {n_exb} low-frequency modes for N={n}"
        )
    return freqs_u * trap.omega_z, vecs, n_exb


@dataclass(frozen=True)
class ModeDecomposition:
    """3N modes at a planar equilibrium, ordered [drumhead desc | ExB asc |
    cyclotron asc].  ``eigvecs`` rows are Q-normalized dimensionless
    phase-space vectors (q, v) of length 6N (axis-major)."""

    frequencies: np.ndarray  # rad/s
    branch: np.ndarray       # str per mode
    eigvecs: np.ndarray      # complex (3N, 6N)
    equilibrium: EquilibriumConfig
    trap: TrapParams = field(repr=False)
    species: SpeciesParams = field(repr=False)
    hessian_u: np.ndarray = field(repr=False, default=None)  # dimensionless (3N, 3N)

    @property
    def n_ions(self) -> int:
        return self.equilibrium.n_ions

    @property
    def units(self) -> UnitSystem:
        return UnitSystem.from_params(self.species, self.trap)

    def branch_frequencies(self, branch: str) -> np.ndarray:
        return self.frequencies[self.branch == branch]

    def apply_q(self, u: np.ndarray) -> np.ndarray:
        """Q u with Q = diag(H, I) on a 6N phase-space vector (dimensionless)."""
        n3 = 3 * self.n_ions
        out = np.empty_like(u)
        out[:n3] = self.hessian_u @ u[:n3]
        out[n3:] = u[n3:]
        return out

    def amplitudes(self, q_u: np.ndarray, v_u: np.ndarray) -> np.ndarray:
        """Complex mode amplitudes of a dimensionless displacement state."""
        u = np.concatenate([q_u, v_u])
        return np.conj(self.eigvecs) @ self.apply_q(u)


def _q_normalize(vecs: np.ndarray, freqs: np.ndarray, dec_apply_q) -> np.ndarray:
    """Normalize rows to w^H Q w = 1; Q-orthogonalize degenerate clusters."""
    out = vecs.copy()
    k = 0
    nmodes = len(freqs)
    while k < nmodes:
        j = k + 1
        while j < nmodes and abs(freqs[j] - freqs[k]) <= 1e-8 * max(freqs[k], 1e-300):
            j += 1
        for a in range(k, j):
            w = out[a]
            for b in range(k, a):  # modified Gram-Schmidt within the cluster
                w = w - out[b] * (np.conj(out[b]) @ dec_apply_q(w))
            nrm = np.real(np.conj(w) @ dec_apply_q(w))
            if nrm <= 0:
                raise ModeError("mode vector with non-positive energy norm")
            out[a] = w / np.sqrt(nrm)
        k = j
    return out


def analyze_modes(
    eq: EquilibriumConfig, trap: TrapParams, species: SpeciesParams
) -> ModeDecomposition:
    """Full 3N decomposition at a planar equilibrium."""
    n = eq.n_ions
    h = total_hessian(eq, trap, species)
    h_u = h.matrix / (species.mass * trap.omega_z**2)

    ax_freqs, ax_vecs = drumhead_modes(h, species)  # SI rad/s, descending
    pl_freqs, pl_vecs, n_exb = planar_modes(h, trap, species)

    nm = 3 * n
    eigvecs = np.zeros((nm, 6 * n), dtype=complex)
    freqs = np.empty(nm)
    branch = np.empty(nm, dtype=object)

    # drumhead: w = (u, i omega u) in the axial slots
    for k in range(n):
        w_u = ax_freqs[k] / trap.omega_z
        eigvecs[k, 2 * n : 3 * n] = ax_vecs[:, k]
        eigvecs[k, 5 * n : 6 * n] = 1j * w_u * ax_vecs[:, k]
        freqs[k] = ax_freqs[k]
        branch[k] = DRUMHEAD

    # planar: eigenvector already is (q_x q_y, v_x v_y)
    for k in range(2 * n):
        row = n + k
        eigvecs[row, 0 : 2 * n] = pl_vecs[: 2 * n, k]
        eigvecs[row, 3 * n : 5 * n] = pl_vecs[2 * n :, k]
        freqs[row] = pl_freqs[k]
        branch[row] = EXB if k < n_exb else CYCLOTRON

    dec = ModeDecomposition(
        frequencies=freqs,
        branch=np.asarray(branch),
        eigvecs=eigvecs,
        equilibrium=eq,
        trap=trap,
        species=species,
        hessian_u=h_u,
    )
    # normalize per segment (frequency clusters only make sense within a branch)
    eigvecs[:n] = _q_normalize(eigvecs[:n], freqs[:n], dec.apply_q)
    eigvecs[n:] = _q_normalize(eigvecs[n:], freqs[n:], dec.apply_q)
    return dec


def _state_to_modal_coords(state: CrystalState, dec: ModeDecomposition):
    units = dec.units
    pos_rot, vel_rot = forces.to_rotating_frame(state, dec.trap.omega_r)
    q = units.length_to_internal(pos_rot - dec.equilibrium.positions_rot)
    v = units.velocity_to_internal(vel_rot)
    return q.T.ravel(), v.T.ravel()  # axis-major


def mode_energies(state: CrystalState, dec: ModeDecomposition):
    """Per-mode energies [J] and branch temperatures for a lab-frame state.

    The energies partition the quadratic Hamiltonian of the displacement state
    exactly; a single mode above the sanity bound (1 K x kB) triggers a
    ReconfigurationWarning since it almost certainly means the crystal
    reorganized and the stored equilibrium no longer applies.
    """
    q_u, v_u = _state_to_modal_coords(state, dec)
    amps = dec.amplitudes(q_u, v_u)
    energies = np.abs(amps) ** 2 * dec.units.energy_scale
    if np.any(energies > ENERGY_SANITY_BOUND):
        warnings.warn(
            "mode energy exceeds the sanity bound: crystal reconfiguration suspected",
            ReconfigurationWarning,
            stacklevel=2,
        )
    temps = {}
    for b in (DRUMHEAD, EXB, CYCLOTRON):
        temps[b] = float(np.mean(energies[dec.branch == b])) / constants.k
    return energies, BranchTemperatures(temps[DRUMHEAD], temps[EXB], temps[CYCLOTRON])


def synthesize_thermal_state(
    eq: EquilibriumConfig,
    dec: ModeDecomposition,
    branch_temps: BranchTemperatures,
    rng_seed: int,
) -> CrystalState:
    """Lab-frame state at t = 0 with every mode at k_B T of its branch and a
    uniformly random phase."""
    rng = np.random.default_rng(rng_seed)
    n = dec.n_ions
    e_target = np.array(
        [constants.k * branch_temps.for_branch(b) / dec.units.energy_scale for b in dec.branch]
    )
    phases = rng.uniform(0.0, 2.0 * np.pi, 3 * n)
    amps = np.sqrt(e_target) * np.exp(1j * phases)
    u = 2.0 * np.real(amps @ dec.eigvecs)
    q = u[: 3 * n].reshape(3, n).T * dec.units.length_scale
    v = u[3 * n :].reshape(3, n).T * dec.units.velocity_scale
    return forces.from_rotating_frame(eq.positions_rot + q, v, 0.0, dec.trap.omega_r)

import numpy as np
import pytest

from penningmd import (
    BranchTemperatures,
    ModeError,
    UnitSystem,
    analyze_modes,
    drumhead_modes,
    find_equilibrium,
    mode_energies,
    planar_modes,
    synthesize_thermal_state,
    total_hessian,
    with_wall_frequency,
)
from penningmd.equilibrium import EquilibriumConfig
from penningmd.params import TrapParams
from penningmd import forces


def test_single_ion_hessian_diagonal(nist):
    species, trap = nist
    from penningmd import beta_from_wall

    beta = beta_from_wall(trap, species)
    eq = find_equilibrium(1, trap, species)
    h = total_hessian(eq, trap, species)
    m, wz2 = species.mass, trap.omega_z**2
    expected = np.diag([m * wz2 * (beta + trap.delta), m * wz2 * (beta - trap.delta), m * wz2])
    assert np.allclose(h.matrix, expected, rtol=1e-12)


def test_hessian_symmetric_and_block_structure(nist, trap204, eq12):
    species, _ = nist
    h = total_hessian(eq12, trap204, species)
    assert np.max(np.abs(h.matrix - h.matrix.T)) <= 1e-12 * np.max(np.abs(h.matrix))
    n = eq12.n_ions
    cross = h.matrix[: 2 * n, 2 * n :]
    assert np.max(np.abs(cross)) == 0.0  # exact for a planar crystal


def test_hessian_matches_force_finite_difference(nist, trap204, eq12):
    species, _ = nist
    h = total_hessian(eq12, trap204, species)
    units = UnitSystem.from_params(species, trap204)
    n = eq12.n_ions
    pos = eq12.positions_rot
    step = 1e-6 * units.length_scale
    rng = np.random.default_rng(4)
    for _ in range(6):
        i, a = rng.integers(n), rng.integers(3)
        p1 = pos.copy(); p1[i, a] += step
        p2 = pos.copy(); p2[i, a] -= step
        fd_row = -(forces.rotating_frame_force(p1, trap204, species)
                   - forces.rotating_frame_force(p2, trap204, species)) / (2 * step)
        col = a * n + i
        h_row = h.matrix[:, col].reshape(3, n).T
        assert np.allclose(fd_row, h_row, rtol=1e-6, atol=1e-6 * np.max(np.abs(h.matrix)))


def test_axial_com_row_sums(nist, trap204, eq12):
    # applying the axial block to the uniform vector gives m wz^2 exactly
    species, _ = nist
    h = total_hessian(eq12, trap204, species)
    ones = np.ones(eq12.n_ions)
    out = h.axial_block @ ones
    assert np.allclose(out, species.mass * trap204.omega_z**2 * ones, rtol=1e-12)


def test_drumhead_com_is_highest(nist, trap204, eq12):
    species, _ = nist
    h = total_hessian(eq12, trap204, species)
    freqs, vecs = drumhead_modes(h, species)
    assert freqs[0] == pytest.approx(trap204.omega_z, rel=1e-10)
    assert np.all(np.diff(freqs) <= 0)
    # eigenvectors orthonormal
    assert np.allclose(vecs.T @ vecs, np.eye(eq12.n_ions), atol=1e-12)
    # COM eigenvector is uniform
    com = np.abs(vecs[:, 0])
    assert np.allclose(com, com[0], rtol=1e-8)


def test_drumhead_error_past_stability(nist):
    species, trap = nist
    # fabricate a planar "equilibrium" compressed enough to be axially unstable
    t = with_wall_frequency(trap, species, 2 * np.pi * 204e3, 0.25)
    eq = find_equilibrium(12, t, species)
    squeezed = EquilibriumConfig(
        positions_rot=eq.positions_rot * 0.25, energy=0.0, gradient_norm=0.0, planar=True
    )
    h = total_hessian(squeezed, t, species)
    with pytest.raises(ModeError, match="planar stability"):
        drumhead_modes(h, species)


def test_single_ion_planar_oracle(nist):
    """Rotating-frame planar frequencies map to the analytic lab-frame
    magnetron / modified-cyclotron values."""
    species, trap = nist
    t1 = TrapParams(trap.b_field, trap.omega_z, 2 * np.pi * 204e3, 0.0)
    eq = find_equilibrium(1, t1, species)
    h = total_hessian(eq, t1, species)
    freqs, vecs, n_exb = planar_modes(h, t1, species)
    assert n_exb == 1 and freqs.size == 2
    wc = species.cyclotron_frequency(t1.b_field)
    disc = np.sqrt(wc**2 / 4 - trap.omega_z**2 / 2)
    w_plus, w_minus = wc / 2 + disc, wc / 2 - disc
    assert w_plus == pytest.approx(2 * np.pi * 7.432e6, rel=1e-3)
    assert w_minus == pytest.approx(2 * np.pi * 0.168e6, rel=1e-3)
    assert t1.omega_r - freqs[0] == pytest.approx(w_minus, rel=1e-10)
    assert freqs[1] + t1.omega_r == pytest.approx(w_plus, rel=1e-10)


def test_mode_counts_and_branches(nist, trap204, dec12):
    n = 12
    assert len(dec12.frequencies) == 3 * n
    for branch in ("drumhead", "exb", "cyclotron"):
        assert np.sum(dec12.branch == branch) == n
    assert np.all(dec12.frequencies > 0)
    # cyclotron cluster sits near the (rotating-frame) cyclotron frequency
    species, _ = nist
    wc = species.cyclotron_frequency(trap204.b_field)
    fc = dec12.branch_frequencies("cyclotron")
    assert np.all(np.abs(fc - (wc - 2 * trap204.omega_r)) < 0.15 * wc)


def test_energy_partition_random_states(nist, trap204, dec12):
    """Sum of projected mode energies equals the quadratic energy exactly."""
    rng = np.random.default_rng(99)
    n = 12
    worst = 0.0
    for _ in range(1000):
        q = rng.normal(size=3 * n) * 1e-3
        v = rng.normal(size=3 * n) * 1e-3
        amps = dec12.amplitudes(q, v)
        e_modes = np.sum(np.abs(amps) ** 2)
        e_quad = 0.5 * (v @ v) + 0.5 * (q @ dec12.hessian_u @ q)
        worst = max(worst, abs(e_modes - e_quad) / e_quad)
    assert worst < 1e-8


def test_projection_linearity(nist, dec12):
    rng = np.random.default_rng(17)
    n = 12
    q1, v1 = rng.normal(size=3 * n), rng.normal(size=3 * n)
    q2, v2 = rng.normal(size=3 * n), rng.normal(size=3 * n)
    a12 = dec12.amplitudes(q1 + q2, v1 + v2)
    assert np.allclose(a12, dec12.amplitudes(q1, v1) + dec12.amplitudes(q2, v2),
                       rtol=1e-12, atol=1e-12)


def test_thermal_synthesis_round_trip(nist, trap204, eq12, dec12):
    temps = BranchTemperatures(3e-3, 10e-3, 1e-3)
    state = synthesize_thermal_state(eq12, dec12, temps, rng_seed=5)
    energies, back = mode_energies(state, dec12)
    assert back.t_drumhead == pytest.approx(3e-3, rel=1e-6)
    assert back.t_exb == pytest.approx(10e-3, rel=1e-6)
    assert back.t_cyclotron == pytest.approx(1e-3, rel=1e-6)
    # every mode individually at kB T of its branch
    from scipy import constants
    for b, t in (("drumhead", 3e-3), ("exb", 10e-3), ("cyclotron", 1e-3)):
        sel = energies[dec12.branch == b]
        assert np.allclose(sel, constants.k * t, rtol=1e-10)


def test_zero_temperature_state_is_equilibrium(nist, trap204, eq12, dec12):
    state = synthesize_thermal_state(eq12, dec12, BranchTemperatures(0, 0, 0), rng_seed=1)
    assert np.array_equal(state.positions, eq12.positions_rot)
    pos_rot, vel_rot = forces.to_rotating_frame(state, trap204.omega_r)
    assert np.max(np.abs(vel_rot)) < 1e-12


def test_single_mode_excitation_round_trip(nist, trap204, eq12, dec12):
    """Exciting one mode returns its energy in that mode only."""
    from scipy import constants

    units = dec12.units
    idx = 15  # an ExB mode
    target = constants.k * 5e-3 / units.energy_scale
    u = 2.0 * np.real(np.sqrt(target) * np.exp(1j * 0.3) * dec12.eigvecs[idx])
    n = 12
    q = u[: 3 * n]
    v = u[3 * n :]
    amps = dec12.amplitudes(q, v)
    e = np.abs(amps) ** 2
    assert e[idx] == pytest.approx(target, rel=1e-10)
    others = np.delete(e, idx)
    assert np.max(others) < 1e-10 * target


def test_mode_energies_reconfiguration_warning(nist, trap204, eq12, dec12):
    from penningmd import ReconfigurationWarning

    state = synthesize_thermal_state(
        eq12, dec12, BranchTemperatures(5.0, 5.0, 5.0), rng_seed=2
    )  # 5 K >> sanity bound
    with pytest.warns(ReconfigurationWarning):
        mode_energies(state, dec12)


def test_nonplanar_equilibrium_rejected(nist, trap204):
    species, _ = nist
    bad = EquilibriumConfig(
        positions_rot=np.array([[0.0, 0.0, 1e-6], [0.0, 0.0, -1e-6]]),
        energy=0.0, gradient_norm=0.0, planar=False,
    )
    with pytest.raises(ModeError, match="planar"):
        total_hessian(bad, trap204, species)


def test_min_drumhead_softens_toward_critical(nist):
    """The lowest drumhead frequency decreases monotonically with omega_r."""
    species, trap = nist
    lows = []
    for f in (176e3, 190e3, 204e3):
        t = with_wall_frequency(trap, species, 2 * np.pi * f, 0.25)
        eq = find_equilibrium(12, t, species)
        dec = analyze_modes(eq, t, species)
        lows.append(dec.branch_frequencies("drumhead").min())
    assert lows[0] > lows[1] > lows[2]

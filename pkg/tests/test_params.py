import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import constants

from penningmd import (
    SpeciesParams,
    TrapParams,
    UnitSystem,
    beta_from_wall,
    confinement_beta,
    default_nist_params,
    energy_to_temperature,
    temperature_to_energy,
    with_wall_frequency,
)

TWO_PI = 2 * np.pi


def beta_oracle(f_r, f_c=7.6e6, f_z=1.58e6):
    # direct arithmetic on the defining formula, written independently
    return (TWO_PI * f_r) * (TWO_PI * f_c - TWO_PI * f_r) / (TWO_PI * f_z) ** 2 - 0.5


def make_trap(f_r, f_c=7.6e6, f_z=1.58e6, delta=0.0):
    species, _ = default_nist_params()
    # pick B so the cyclotron frequency is exactly f_c for this species
    b = TWO_PI * f_c * species.mass / species.charge
    return species, TrapParams(b, TWO_PI * f_z, TWO_PI * f_r, delta)


def test_beta_at_180_khz():
    species, trap = make_trap(180e3)
    assert beta_from_wall(trap, species) == pytest.approx(beta_oracle(180e3), rel=1e-12)
    assert beta_from_wall(trap, species) == pytest.approx(0.0350, abs=2e-4)


def test_beta_at_204_khz():
    species, trap = make_trap(204e3)
    assert beta_from_wall(trap, species) == pytest.approx(beta_oracle(204e3), rel=1e-12)
    assert beta_from_wall(trap, species) == pytest.approx(0.1044, abs=2e-4)


def test_beta_zero_crossing():
    # omega_r (omega_c - omega_r) = omega_z^2 / 2 is the algebraic zero
    f_c, f_z = 7.6e6, 1.58e6
    wc, wz = TWO_PI * f_c, TWO_PI * f_z
    wr = (wc - np.sqrt(wc**2 - 2 * wz**2)) / 2
    species, trap = make_trap(wr / TWO_PI)
    assert beta_from_wall(trap, species) == pytest.approx(0.0, abs=1e-12)


def test_beta_rejects_out_of_range():
    species, _ = default_nist_params()
    with pytest.raises(ValueError):
        beta_from_wall(
            TrapParams(4.4588, TWO_PI * 1.58e6, TWO_PI * 10e6, 0.0), species
        )


@given(st.floats(min_value=0.05, max_value=0.95))
def test_beta_symmetric_under_reflection(frac):
    species, trap = make_trap(180e3)
    wc = species.cyclotron_frequency(trap.b_field)
    wr = frac * wc
    t1 = TrapParams(trap.b_field, trap.omega_z, wr, 0.0)
    t2 = TrapParams(trap.b_field, trap.omega_z, wc - wr, 0.0)
    assert beta_from_wall(t1, species) == pytest.approx(
        beta_from_wall(t2, species), rel=1e-12, abs=1e-12
    )


def test_default_nist_values():
    species, trap = default_nist_params()
    f_c = species.cyclotron_frequency(trap.b_field) / TWO_PI
    assert f_c == pytest.approx(7.60e6, rel=2e-3)
    assert species.doppler_limit == pytest.approx(0.43e-3, rel=2e-2)
    # delta / beta = 0.25 at any configured wall frequency
    for f_r in (170e3, 180e3, 204e3):
        _, t = default_nist_params(omega_r=TWO_PI * f_r)
        assert t.delta / beta_from_wall(t, species) == pytest.approx(0.25, rel=1e-12)


def test_confinement_beta_enforces_delta():
    species, trap = default_nist_params()
    bad = TrapParams(trap.b_field, trap.omega_z, trap.omega_r, 10.0)
    with pytest.raises(ValueError):
        confinement_beta(bad, species)


def test_with_wall_frequency_keeps_absolute_delta():
    species, trap = default_nist_params()
    t2 = with_wall_frequency(trap, species, TWO_PI * 190e3)
    assert t2.delta == trap.delta
    assert t2.omega_r == TWO_PI * 190e3


def test_unit_system_round_trip(nist):
    species, trap = nist
    units = UnitSystem.from_params(species, trap)
    rng = np.random.default_rng(0)
    x = rng.normal(size=(7, 3)) * 1e-5
    assert np.allclose(units.length_to_si(units.length_to_internal(x)), x, rtol=1e-12)
    v = rng.normal(size=(7, 3)) * 10
    assert np.allclose(units.velocity_to_si(units.velocity_to_internal(v)), v, rtol=1e-12)
    e = 3.7e-22
    assert units.energy_to_si(units.energy_to_internal(e)) == pytest.approx(e, rel=1e-12)
    t = 1.23e-4
    assert units.time_to_si(units.time_to_internal(t)) == pytest.approx(t, rel=1e-12)


def test_unit_system_normalizes_coulomb(nist):
    # in internal units the Coulomb coupling is 1 by construction of l0
    species, trap = nist
    units = UnitSystem.from_params(species, trap)
    k_e = 1.0 / (4 * np.pi * constants.epsilon_0)
    coupling = k_e * species.charge**2 / (units.energy_scale * units.length_scale)
    assert coupling == pytest.approx(1.0, rel=1e-12)


def test_temperature_conversion_round_trip():
    for n in (1, 54, 100):
        e = temperature_to_energy(10e-3, n)
        assert energy_to_temperature(e, n) == pytest.approx(10e-3, rel=1e-15)
    assert temperature_to_energy(10e-3, 1) == pytest.approx(
        10e-3 * constants.k, rel=1e-12
    )


def test_species_validation():
    with pytest.raises(ValueError):
        SpeciesParams(mass=-1.0, charge=1.6e-19, transition_wavelength=313e-9,
                      natural_linewidth=1e8)

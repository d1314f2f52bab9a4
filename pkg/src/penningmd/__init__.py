"""Molecular dynamics and normal-mode analysis of planar ion crystals in a
Penning trap, with stochastic Doppler laser cooling.

The package reproduces the resonant-coupling cooling effect: tuning the
rotating-wall frequency toward the planar stability limit pulls the lowest
drumhead modes down toward the ExB branch, and the resulting nonlinear mode
coupling lets the laser-cooled drumhead modes sympathetically cool the
in-plane potential energy to around a millikelvin within ~10 ms.
"""

__version__ = "0.1.0"

from .params import (
    BERYLLIUM_9_AMU,
    CrystalState,
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
from .forces import (
    ForceField,
    coulomb_force,
    coulomb_potential,
    from_rotating_frame,
    lab_frame_force,
    rotating_potential_energy,
    rotating_total_energy,
    to_rotating_frame,
)
from .equilibrium import (
    EquilibriumConfig,
    EquilibriumError,
    critical_wall_frequency,
    find_equilibrium,
)
from .modes import (
    BranchTemperatures,
    HessianData,
    ModeDecomposition,
    ModeError,
    ReconfigurationWarning,
    analyze_modes,
    drumhead_modes,
    mode_energies,
    planar_modes,
    synthesize_thermal_state,
    total_hessian,
)
from .linearized import LinearizedCoulomb, build_linearized, linearized_coulomb_force
from .lasers import (
    CoolingConfig,
    GaussianProfile,
    LaserBeam,
    ScatterStream,
    UNIFORM,
    apply_scattering,
    nist_beam_set,
    scattering_rate,
)
from .integrator import (
    DiagnosticsSeries,
    Precomputed,
    RunConfig,
    RunResult,
    ThermalBranches,
    run,
    step,
    trajectory,
)
from .spectra import SpectrumResult, detect_mode_peaks, drumhead_spectrum

"""Run configuration file format (YAML) with strict validation.

Unknown keys are rejected so typos fail loudly before any compute starts.
Frequencies in the file are ordinary frequencies in Hz (f = omega/2pi),
lengths carry unit suffixes in the key names.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional

import numpy as np
import yaml
from scipy import constants

from .lasers import UNIFORM, CoolingConfig, GaussianProfile, LaserBeam, nist_beam_set
from .integrator import RunConfig, ThermalBranches
from .params import SpeciesParams, TrapParams, with_wall_frequency, BERYLLIUM_9_AMU


class ConfigError(ValueError):
    pass


_BEAM_SCHEMA = {
    "direction": list,
    "detuning_hz": (int, float),
    "saturation": (int, float),
    "profile": dict,
}

_PROFILE_SCHEMA = {
    "waist_um": (int, float),
    "offset_axis": list,
    "offset_um": (int, float),
}

_SCHEMA: dict[str, Any] = {
    "run": {
        "n_ions": int,
        "b_field_t": (int, float),
        "f_z_hz": (int, float),
        "f_wall_hz": (int, float),
        "delta_over_beta": (int, float),
        "coulomb": str,
        "dt_s": (int, float),
        "t_final_s": (int, float),
        "sample_interval_s": (int, float),
        "seed": int,
        "initial_temps_mk": {
            "drumhead": (int, float),
            "exb": (int, float),
            "cyclotron": (int, float),
        },
        "branch_temps": str,
        "cooling": {"enabled": bool, "beams": (str, list)},
        "psd": {
            "enabled": bool,
            "duration_s": (int, float),
            "sample_dt_s": (int, float),
            "segments": int,
            "lasers_off": bool,
        },
    },
    "species": {
        "mass_amu": (int, float),
        "charge_e": (int, float),
        "wavelength_nm": (int, float),
        "linewidth_hz": (int, float),
    },
    "scan": {
        "f_start_hz": (int, float),
        "f_stop_hz": (int, float),
        "count": int,
        "f_list_hz": list,
    },
    "outputs": {
        "directory": str,
        "equilibrium": bool,
        "modes": bool,
        "diagnostics": bool,
        "trajectory": bool,
        "trajectory_sample_dt_s": (int, float),
    },
}

DEFAULTS: dict[str, Any] = {
    "run": {
        "n_ions": 54,
        "b_field_t": 4.4588,
        "f_z_hz": 1.58e6,
        "f_wall_hz": 180e3,
        "delta_over_beta": 0.25,
        "coulomb": "full",
        "dt_s": 1e-9,
        "t_final_s": 1e-3,
        "sample_interval_s": 1e-6,
        "seed": 1,
        "initial_temps_mk": {"drumhead": 10.0, "exb": 10.0, "cyclotron": 10.0},
        "branch_temps": "auto",
        "cooling": {"enabled": False, "beams": "nist"},
        "psd": {
            "enabled": False,
            "duration_s": 3e-3,
            "sample_dt_s": 2e-8,
            "segments": 6,
            "lasers_off": True,
        },
    },
    "species": {
        "mass_amu": BERYLLIUM_9_AMU,
        "charge_e": 1.0,
        "wavelength_nm": 313.0,
        "linewidth_hz": 18e6,
    },
    "scan": None,
    "outputs": {
        "directory": "out",
        "equilibrium": True,
        "modes": True,
        "diagnostics": True,
        "trajectory": False,
        "trajectory_sample_dt_s": 1e-6,
    },
}


def _check_keys(data, schema, path):
    if not isinstance(data, dict):
        raise ConfigError(f"{path or 'top level'}: expected a mapping")
    for key, value in data.items():
        where = f"{path}.{key}" if path else key
        if key not in schema:
            raise ConfigError(f"unknown key: {where}")
        expected = schema[key]
        if isinstance(expected, dict):
            if key == "scan" and value is None:
                continue
            _check_keys(value, expected, where)
            continue
        if not isinstance(value, expected):
            # YAML 1.1 reads "1.58e6" as a string; accept number-like strings
            # where a number is expected
            wants_float = expected == (int, float) or (
                isinstance(expected, tuple) and float in expected
            )
            if wants_float and isinstance(value, str):
                try:
                    data[key] = float(value)
                    continue
                except ValueError:
                    pass
            raise ConfigError(
                f"{where}: expected {expected}, got {type(value).__name__}"
            )


def _merge(base, override):
    out = copy.deepcopy(base)
    for key, value in (override or {}).items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], value)
        else:
            out[key] = copy.deepcopy(value)
    return out


@dataclass
class ExperimentConfig:
    """Validated, fully resolved experiment description."""

    raw: dict

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        _check_keys(data, _SCHEMA, "")
        resolved = _merge(DEFAULTS, data)
        run = resolved["run"]
        if run["coulomb"] not in ("full", "linearized"):
            raise ConfigError("run.coulomb must be 'full' or 'linearized'")
        if run["branch_temps"] not in ("auto", "on", "off"):
            raise ConfigError("run.branch_temps must be auto, on, or off")
        scan = resolved.get("scan")
        if scan is not None:
            has_list = "f_list_hz" in scan
            has_range = "f_start_hz" in scan or "f_stop_hz" in scan or "count" in scan
            if has_list and has_range:
                raise ConfigError("scan: give either f_list_hz or a start/stop/count range")
            if not has_list:
                for need in ("f_start_hz", "f_stop_hz", "count"):
                    if need not in scan:
                        raise ConfigError(f"scan.{need} is required for a range scan")
        return cls(raw=resolved)

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        try:
            data = yaml.safe_load(Path(path).read_text())
        except yaml.YAMLError as exc:
            raise ConfigError(f"{path}: invalid YAML ({exc})") from exc
        if data is None:
            data = {}
        return cls.from_dict(data)

    # -- resolved physics objects ------------------------------------------

    def species(self) -> SpeciesParams:
        s = self.raw["species"]
        return SpeciesParams(
            mass=s["mass_amu"] * constants.atomic_mass,
            charge=s["charge_e"] * constants.e,
            transition_wavelength=s["wavelength_nm"] * 1e-9,
            natural_linewidth=2.0 * np.pi * s["linewidth_hz"],
        )

    def trap(self, f_wall_hz: Optional[float] = None) -> TrapParams:
        r = self.raw["run"]
        f_wall = r["f_wall_hz"] if f_wall_hz is None else f_wall_hz
        template = TrapParams(
            r["b_field_t"], 2.0 * np.pi * r["f_z_hz"], 2.0 * np.pi * f_wall, 0.0
        )
        return with_wall_frequency(
            template, self.species(), 2.0 * np.pi * f_wall, r["delta_over_beta"]
        )

    def cooling(self, seed_offset: int = 0) -> Optional[CoolingConfig]:
        c = self.raw["run"]["cooling"]
        if not c["enabled"]:
            return None
        seed = self.raw["run"]["seed"] + seed_offset
        if c["beams"] == "nist":
            return nist_beam_set(self.species(), rng_seed=seed)
        if isinstance(c["beams"], str):
            raise ConfigError(f"unknown beam set name: {c['beams']!r}")
        beams = []
        k = self.species().wavevector
        for b in c["beams"]:
            _check_keys(b, _BEAM_SCHEMA, "run.cooling.beams[]")
            profile = UNIFORM
            if "profile" in b:
                p = b["profile"]
                _check_keys(p, _PROFILE_SCHEMA, "run.cooling.beams[].profile")
                profile = GaussianProfile(
                    waist=p["waist_um"] * 1e-6,
                    offset_axis=tuple(p["offset_axis"]),
                    offset=p["offset_um"] * 1e-6,
                )
            direction = np.asarray(b["direction"], dtype=float)
            direction = tuple(direction / np.linalg.norm(direction))
            beams.append(
                LaserBeam(
                    direction=direction,
                    detuning=2.0 * np.pi * b["detuning_hz"],
                    peak_saturation=b["saturation"],
                    wavevector=k,
                    profile=profile,
                )
            )
        return CoolingConfig(beams=tuple(beams), rng_seed=seed)

    def run_config(
        self, f_wall_hz: Optional[float] = None, seed_offset: int = 0
    ) -> RunConfig:
        r = self.raw["run"]
        temps = r["initial_temps_mk"]
        return RunConfig(
            n_ions=r["n_ions"],
            trap=self.trap(f_wall_hz),
            species=self.species(),
            t_final=r["t_final_s"],
            initial_state=ThermalBranches(
                temps["drumhead"] * 1e-3,
                temps["exb"] * 1e-3,
                temps["cyclotron"] * 1e-3,
                seed=r["seed"] + seed_offset,
            ),
            coulomb_mode=r["coulomb"],
            cooling=self.cooling(seed_offset),
            dt=r["dt_s"],
            sample_interval=r["sample_interval_s"],
            rng_seed=r["seed"] + seed_offset,
            branch_temps=r["branch_temps"],
        )

    def scan_frequencies(self) -> Optional[np.ndarray]:
        scan = self.raw.get("scan")
        if scan is None:
            return None
        if "f_list_hz" in scan:
            return np.asarray(scan["f_list_hz"], dtype=float)
        return np.linspace(scan["f_start_hz"], scan["f_stop_hz"], scan["count"])

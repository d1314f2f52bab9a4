"""Rotating-frame crystal equilibria and the planar -> 3D critical frequency.

Equilibria are local minima of the rotating-frame potential, found from a
battery of seeded starts (compressed random clouds, hexagonal lattices, random
discs) with L-BFGS-B followed by a Newton polish on the analytic Hessian.

Near the 2D -> 3D threshold the global minimum is a slightly buckled 3D
configuration while the physically prepared crystal is still a metastable
planar minimum, so selection prefers the lowest-energy *axially stable planar*
configuration when one exists and falls back to the 3D search otherwise.  The
planar crystal loses stability when the axial block of the Hessian stops being
positive definite (the softest drumhead mode reaches zero frequency); the
critical wall frequency is located by bisecting on that sign.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import optimize

from . import forces
from .params import SpeciesParams, TrapParams, UnitSystem, confinement_beta, with_wall_frequency

PLANARITY_TOL = 1e-6  # max |z| below this (in units of l0) counts as planar


class EquilibriumError(RuntimeError):
    pass


@dataclass(frozen=True)
class EquilibriumConfig:
    """Converged rotating-frame equilibrium: positions [m], energy [J],
    residual force infinity-norm [N], planarity flag."""

    positions_rot: np.ndarray
    energy: float
    gradient_norm: float
    planar: bool

    @property
    def n_ions(self) -> int:
        return self.positions_rot.shape[0]

    @property
    def radius(self) -> float:
        """Largest planar distance from the trap axis [m]."""
        return float(np.max(np.hypot(self.positions_rot[:, 0], self.positions_rot[:, 1])))

    def min_spacing(self) -> float:
        """Smallest inter-ion distance [m]."""
        if self.n_ions == 1:
            return np.inf
        _, dist = forces.pair_separations_u(self.positions_rot)
        n = self.n_ions
        return float(np.min(dist[~np.eye(n, dtype=bool)]))


# ---------------------------------------------------------------------------
# seeding
# ---------------------------------------------------------------------------

def _hex_lattice(n: int, spacing: float) -> np.ndarray:
    """n sites of a triangular lattice closest to the origin, planar (N, 3)."""
    rings = int(np.ceil(np.sqrt(n))) + 2
    pts = []
    for i in range(-rings, rings + 1):
        for j in range(-rings, rings + 1):
            x = spacing * (i + 0.5 * j)
            y = spacing * (np.sqrt(3.0) / 2.0) * j
            pts.append((x * x + y * y, x, y))
    pts.sort()
    out = np.zeros((n, 3))
    for k in range(n):
        out[k, 0] = pts[k][1]
        out[k, 1] = pts[k][2]
    return out


def _scaled_hex_seed(n: int, beta: float, delta: float) -> np.ndarray:
    """Hexagonal seed with the overall scale optimized for the trap strength."""
    base = _hex_lattice(n, 1.0)
    if n == 1:
        return base
    guess = (2.0 / max(beta - delta, 1e-6)) ** (1.0 / 3.0)

    def energy_of_scale(s):
        return forces.rotating_energy_u(base * s, beta, delta)

    res = optimize.minimize_scalar(
        energy_of_scale, bounds=(0.3 * guess, 4.0 * guess), method="bounded"
    )
    return base * res.x


def _planar_seeds(n: int, beta: float, delta: float, count: int, rng: np.random.Generator):
    """Deterministic battery of in-plane starting configurations.

    Compressed-cloud starts relax through many rearrangements and funnel to the
    deep (symmetric) basins much more reliably than perturbed lattices, so they
    lead the battery.
    """
    hex_seed = _scaled_hex_seed(n, beta, delta)
    radius = max(np.max(np.hypot(hex_seed[:, 0], hex_seed[:, 1])), 1.0)
    seeds = []
    for k in range(count):
        if k == 0 and n > 2:
            start = np.zeros((n, 3))
            start[:, :2] = rng.normal(0.0, 0.5, (n, 2))
        elif k == 1:
            start = hex_seed.copy()
        elif k % 3 == 2 and n > 2:
            start = np.zeros((n, 3))
            start[:, :2] = rng.normal(0.0, 0.5 + 0.5 * (k % 4), (n, 2))
        elif k % 3 == 0:
            start = hex_seed + np.column_stack(
                [rng.normal(scale=0.05 * (1 + k % 5), size=(n, 2)), np.zeros(n)]
            )
        else:
            ang = rng.uniform(0, 2 * np.pi, n)
            rad = radius * np.sqrt(rng.uniform(0.02, 1.0, n))
            start = np.column_stack([rad * np.cos(ang), rad * np.sin(ang), np.zeros(n)])
        seeds.append(start)
    return seeds


# ---------------------------------------------------------------------------
# minimization (dimensionless)
# ---------------------------------------------------------------------------

def _flat(pos: np.ndarray) -> np.ndarray:
    return pos.T.ravel().copy()  # axis-major [x..., y..., z...]

def _unflat(flat: np.ndarray, n: int) -> np.ndarray:
    return flat.reshape(3, n).T.copy()


def _minimize_u(
    pos0: np.ndarray,
    beta: float,
    delta: float,
    planar_only: bool,
    max_iter: int,
    gtol: float,
):
    """L-BFGS-B then Newton polish; returns (positions, energy, grad_inf)."""
    n = pos0.shape[0]

    if planar_only:
        def fun(xy):
            pos = np.column_stack([xy[:n], xy[n:], np.zeros(n)])
            e = forces.rotating_energy_u(pos, beta, delta)
            g = forces.rotating_gradient_u(pos, beta, delta)
            return e, np.concatenate([g[:, 0], g[:, 1]])
        x0 = _flat(pos0)[: 2 * n]
    else:
        def fun(x):
            pos = _unflat(x, n)
            e = forces.rotating_energy_u(pos, beta, delta)
            g = forces.rotating_gradient_u(pos, beta, delta)
            return e, _flat(g)
        x0 = _flat(pos0)

    res = optimize.minimize(
        fun, x0, jac=True, method="L-BFGS-B",
        options={"maxiter": max_iter, "ftol": 1e-16, "gtol": 1e-7, "maxcor": 20},
    )
    x = res.x

    def assemble(xv):
        if planar_only:
            return np.column_stack([xv[:n], xv[n:], np.zeros(n)])
        return _unflat(xv, n)

    # Newton polish drives the residual to round-off near a minimum
    for _ in range(40):
        pos = assemble(x)
        g = forces.rotating_gradient_u(pos, beta, delta)
        gvec = np.concatenate([g[:, 0], g[:, 1]]) if planar_only else _flat(g)
        gi = float(np.max(np.abs(gvec)))
        if gi <= 1e-13:
            break
        h = forces.rotating_hessian_u(pos, beta, delta)
        if planar_only:
            h = h[: 2 * n, : 2 * n]
        try:
            step = -np.linalg.solve(h, gvec)
        except np.linalg.LinAlgError:
            break
        e0 = forces.rotating_energy_u(pos, beta, delta)
        scale = 1.0
        for _bt in range(30):
            xn = x + scale * step
            en = forces.rotating_energy_u(assemble(xn), beta, delta)
            if en <= e0 + 1e-15 * abs(e0):
                break
            scale *= 0.5
        else:
            break
        x = x + scale * step

    pos = assemble(x)
    g = forces.rotating_gradient_u(pos, beta, delta)
    gvec = np.concatenate([g[:, 0], g[:, 1]]) if planar_only else _flat(g)
    return pos, forces.rotating_energy_u(pos, beta, delta), float(np.max(np.abs(gvec)))


def axial_stiffness_min_u(pos_planar: np.ndarray, beta: float, delta: float) -> float:
    """Smallest eigenvalue of the axial Hessian block at a planar configuration
    (units of m omega_z^2); positive means the planar crystal is stable."""
    n = pos_planar.shape[0]
    h = forces.rotating_hessian_u(pos_planar, beta, delta)
    axial = h[2 * n :, 2 * n :]
    return float(np.linalg.eigvalsh(axial)[0])


def _planar_minima_u(
    n: int,
    beta: float,
    delta: float,
    seeds: int,
    max_iter: int,
    gtol: float,
    rng: np.random.Generator,
    extra_starts=(),
):
    """Distinct converged in-plane minima: list of (energy, axial_min_eig, pos)."""
    rows = []
    starts = list(extra_starts) + _planar_seeds(n, beta, delta, seeds, rng)
    for start in starts:
        try:
            pos, e, gi = _minimize_u(start, beta, delta, True, max_iter, gtol)
        except ValueError:
            continue
        if gi > gtol:
            continue
        rows.append((e, axial_stiffness_min_u(pos, beta, delta), pos))
    if not rows:
        raise EquilibriumError(f"planar minimization failed for N={n}")
    rows.sort(key=lambda r: r[0])
    out = []
    for e, me, pos in rows:
        if out and abs(e - out[-1][0]) < 1e-8 * max(1.0, abs(e)):
            continue
        out.append((e, me, pos))
    return out


def find_equilibrium(
    n_ions: int,
    trap: TrapParams,
    species: SpeciesParams,
    seeds: int = 8,
    max_iter: int = 8000,
    tol: float = 1e-9,
    rng_seed: int = 0,
) -> EquilibriumConfig:
    """Minimize the rotating-frame potential from a battery of seeded starts.

    ``tol`` bounds the infinity-norm of the residual dimensionless force (i.e.
    in units of m omega_z^2 l0).  If an axially stable planar minimum exists
    the lowest-energy such configuration is returned (this is the crystal a
    real preparation sequence ends up in, even when a buckled 3D configuration
    has marginally lower energy near the critical frequency); otherwise the
    lowest-energy 3D minimum from out-of-plane-perturbed starts is returned.
    """
    if n_ions < 1:
        raise ValueError("n_ions must be >= 1")
    beta = confinement_beta(trap, species)
    delta = trap.delta
    units = UnitSystem.from_params(species, trap)

    if n_ions == 1:
        return EquilibriumConfig(np.zeros((1, 3)), 0.0, 0.0, True)

    rng = np.random.default_rng(rng_seed)
    minima = _planar_minima_u(n_ions, beta, delta, seeds, max_iter, tol, rng)
    stable = [(e, me, pos) for (e, me, pos) in minima if me > 0.0]
    if stable:
        e, _, pos = stable[0]
        return EquilibriumConfig(
            positions_rot=units.length_to_si(pos),
            energy=units.energy_to_si(e),
            gradient_norm=0.0
            if n_ions == 1
            else float(np.max(np.abs(forces.rotating_gradient_u(pos, beta, delta))))
            * units.force_scale,
            planar=True,
        )

    # no stable planar crystal: relax in 3D with out-of-plane noise
    results = []
    for k, (e0, _, pos0) in enumerate(minima[: max(2, seeds // 2)]):
        start = pos0.copy()
        start[:, 2] += rng.normal(scale=1e-3, size=n_ions)
        try:
            pos, e, gi = _minimize_u(start, beta, delta, False, max_iter, tol)
        except ValueError:
            continue
        if gi <= tol:
            results.append((e, k, pos, gi))
    if not results:
        raise EquilibriumError(
            f"equilibrium search failed for N={n_ions}: no seed converged below tol={tol:g}"
        )
    results.sort(key=lambda r: (r[0], r[1]))
    e, _, pos, gi = results[0]
    is_planar = bool(np.max(np.abs(pos[:, 2])) < PLANARITY_TOL)
    return EquilibriumConfig(
        positions_rot=units.length_to_si(pos),
        energy=units.energy_to_si(e),
        gradient_norm=gi * units.force_scale,
        planar=is_planar,
    )


# ---------------------------------------------------------------------------
# critical wall frequency
# ---------------------------------------------------------------------------

def planar_is_stable(
    n_ions: int,
    trap: TrapParams,
    species: SpeciesParams,
    rng_seed: int = 0,
    seeds: int = 6,
) -> bool:
    """True when the lowest-energy planar configuration is axially stable."""
    beta = confinement_beta(trap, species)
    rng = np.random.default_rng(rng_seed)
    minima = _planar_minima_u(n_ions, beta, trap.delta, seeds, 8000, 1e-9, rng)
    return minima[0][1] > 0.0


def critical_wall_frequency(
    n_ions: int,
    trap_template: TrapParams,
    species: SpeciesParams,
    delta_over_beta: float,
    bracket: tuple[float, float],
    tol: float = 2.0 * np.pi * 50.0,
    rng_seed: int = 0,
) -> float:
    """Largest omega_r [rad/s] with a stable planar crystal, by bisection.

    delta is recomputed from delta_over_beta at every trial frequency.  The
    planar/3D classification uses the sign of the softest axial stiffness of
    the lowest-energy planar configuration, which is what actually changes
    sign at the transition (the softest drumhead mode reaching zero).
    """

    def stable(omega_r: float) -> bool:
        trap = with_wall_frequency(trap_template, species, omega_r, delta_over_beta)
        return planar_is_stable(n_ions, trap, species, rng_seed=rng_seed)

    lo, hi = bracket
    if not lo < hi:
        raise ValueError("bracket must satisfy lo < hi")
    if not stable(lo):
        raise ValueError("bracket invalid: equilibrium at the lower edge is not planar")
    if stable(hi):
        raise ValueError("bracket invalid: equilibrium at the upper edge is still planar")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if stable(mid):
            lo = mid
        else:
            hi = mid
    return lo

"""Compiled inner loops: pairwise Coulomb accumulation, the Boris step with
exact magnetic rotation and arc drift, and the photon-scattering sweep.

The integrator kernel works on dimensionless arrays (see params.UnitSystem);
``scatter_step`` is unit-agnostic and is also called with SI arrays by the
lasers module.  Randomness is an explicit splitmix64 state (one uint64 per
stream) so trajectories are bit-reproducible for a given seed and the stream
can be checkpointed across kernel calls.

Everything here is serial and uses fixed iteration/summation order on purpose:
bit-level determinism is part of the contract.
"""

import numpy as np
from numba import njit

U64 = np.uint64
_INV_2_53 = 1.0 / 9007199254740992.0


@njit(cache=True, inline="always")
def _sm64_next(state):
    state[0] = state[0] + U64(0x9E3779B97F4A7C15)
    z = state[0]
    z = (z ^ (z >> U64(30))) * U64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> U64(27))) * U64(0x94D049BB133111EB)
    return z ^ (z >> U64(31))


@njit(cache=True, inline="always")
def _sm64_uniform(state):
    return float(_sm64_next(state) >> U64(11)) * _INV_2_53


def new_rng_state(seed: int) -> np.ndarray:
    """Fresh stream state; the seed is scrambled once so nearby seeds differ."""
    state = np.array([np.uint64(seed & 0xFFFFFFFFFFFFFFFF)], dtype=np.uint64)
    _sm64_next(state)
    return state


@njit(cache=True)
def stream_uniform(state):
    return _sm64_uniform(state)


@njit(cache=True, inline="always")
def _coulomb_accel(pos, acc):
    # pairwise 1/r^2, Newton's third law; dimensionless (unit coupling, unit mass)
    n = pos.shape[0]
    for i in range(n):
        xi = pos[i, 0]
        yi = pos[i, 1]
        zi = pos[i, 2]
        for j in range(i + 1, n):
            dx = xi - pos[j, 0]
            dy = yi - pos[j, 1]
            dz = zi - pos[j, 2]
            r2 = dx * dx + dy * dy + dz * dz
            inv = 1.0 / np.sqrt(r2)
            inv3 = inv / r2
            fx = dx * inv3
            fy = dy * inv3
            fz = dz * inv3
            acc[i, 0] += fx
            acc[i, 1] += fy
            acc[i, 2] += fz
            acc[j, 0] -= fx
            acc[j, 1] -= fy
            acc[j, 2] -= fz


@njit(cache=True)
def eval_accel(pos, t, wr, delta, coul_full, hlin, jlin, eqflat, acc, qbuf):
    """Dimensionless lab-frame acceleration (electric part only; the magnetic
    force is applied by the rotation substep)."""
    n = pos.shape[0]
    cw = np.cos(wr * t)
    sw = np.sin(wr * t)
    for i in range(n):
        acc[i, 0] = 0.5 * pos[i, 0]
        acc[i, 1] = 0.5 * pos[i, 1]
        acc[i, 2] = -pos[i, 2]
    if coul_full:
        _coulomb_accel(pos, acc)
        for i in range(n):
            xw = cw * pos[i, 0] - sw * pos[i, 1]
            yw = sw * pos[i, 0] + cw * pos[i, 1]
            fxw = -delta * xw
            fyw = delta * yw
            acc[i, 0] += cw * fxw + sw * fyw
            acc[i, 1] += -sw * fxw + cw * fyw
    else:
        # rotate into the wall frame, linearized Coulomb + wall there, rotate back
        for i in range(n):
            xw = cw * pos[i, 0] - sw * pos[i, 1]
            yw = sw * pos[i, 0] + cw * pos[i, 1]
            qbuf[i] = xw - eqflat[i]
            qbuf[n + i] = yw - eqflat[n + i]
            qbuf[2 * n + i] = pos[i, 2] - eqflat[2 * n + i]
        f = np.dot(hlin, qbuf)
        for i in range(n):
            xw = cw * pos[i, 0] - sw * pos[i, 1]
            yw = sw * pos[i, 0] + cw * pos[i, 1]
            fxw = -jlin[i] - f[i] - delta * xw
            fyw = -jlin[n + i] - f[n + i] + delta * yw
            acc[i, 0] += cw * fxw + sw * fyw
            acc[i, 1] += -sw * fxw + cw * fyw
            acc[i, 2] += -jlin[2 * n + i] - f[2 * n + i]


@njit(cache=True)
def scatter_step(pos, vel, dt, gamma, dirs, kvec, det, speak, kind, waist, offset,
                 offaxis, recoil, rng, rates):
    """One scattering sweep: rates frozen on the input state, then independent
    Bernoulli trials per (ion, beam) in fixed order.  Mutates vel; returns the
    event count."""
    n = pos.shape[0]
    nb = kvec.shape[0]
    for i in range(n):
        for b in range(nb):
            s = speak[b]
            if kind[b] == 1:
                u = (pos[i, 0] * offaxis[b, 0] + pos[i, 1] * offaxis[b, 1]
                     + pos[i, 2] * offaxis[b, 2]) - offset[b]
                s = s * np.exp(-2.0 * u * u / (waist[b] * waist[b]))
            dop = kvec[b] * (vel[i, 0] * dirs[b, 0] + vel[i, 1] * dirs[b, 1]
                             + vel[i, 2] * dirs[b, 2])
            x = 2.0 * (det[b] - dop) / gamma
            rates[i, b] = 0.5 * gamma * s / (1.0 + s + x * x)
    nev = 0
    for i in range(n):
        for b in range(nb):
            if _sm64_uniform(rng) < rates[i, b] * dt:
                nev += 1
                ez = 2.0 * _sm64_uniform(rng) - 1.0
                phi = 2.0 * np.pi * _sm64_uniform(rng)
                rho = np.sqrt(max(1.0 - ez * ez, 0.0))
                r = recoil[b]
                vel[i, 0] += r * (dirs[b, 0] + rho * np.cos(phi))
                vel[i, 1] += r * (dirs[b, 1] + rho * np.sin(phi))
                vel[i, 2] += r * (dirs[b, 2] + ez)
    return nev


@njit(cache=True)
def advance(pos, vel, t0, nsteps, dt, wc, wr, delta, coul_full,
            hlin, jlin, eqflat,
            gamma, dirs, kvec, det, speak, kind, waist, offset, offaxis, recoil,
            rng, zbuf, zevery, zfill, step_base, acc, qbuf, rates):
    """Advance nsteps of the symmetric kick / exact-rotation-and-arc-drift /
    kick scheme, with optional scattering after each step and optional axial
    position recording every ``zevery`` steps (global step counting via
    ``step_base`` keeps chunked calls identical to one long call).

    Returns (zfill, events)."""
    n = pos.shape[0]
    nb = kvec.shape[0]
    theta = wc * dt
    c = np.cos(theta)
    s = np.sin(theta)
    a1 = s / wc
    a2 = (1.0 - c) / wc
    eval_accel(pos, t0, wr, delta, coul_full, hlin, jlin, eqflat, acc, qbuf)
    nev = 0
    for l in range(nsteps):
        for i in range(n):
            vel[i, 0] += 0.5 * dt * acc[i, 0]
            vel[i, 1] += 0.5 * dt * acc[i, 1]
            vel[i, 2] += 0.5 * dt * acc[i, 2]
        for i in range(n):
            vx = vel[i, 0]
            vy = vel[i, 1]
            pos[i, 0] += a1 * vx + a2 * vy
            pos[i, 1] += -a2 * vx + a1 * vy
            pos[i, 2] += dt * vel[i, 2]
            vel[i, 0] = c * vx + s * vy
            vel[i, 1] = -s * vx + c * vy
        t1 = t0 + (l + 1) * dt
        eval_accel(pos, t1, wr, delta, coul_full, hlin, jlin, eqflat, acc, qbuf)
        for i in range(n):
            vel[i, 0] += 0.5 * dt * acc[i, 0]
            vel[i, 1] += 0.5 * dt * acc[i, 1]
            vel[i, 2] += 0.5 * dt * acc[i, 2]
        if nb > 0:
            nev += scatter_step(pos, vel, dt, gamma, dirs, kvec, det, speak, kind,
                                waist, offset, offaxis, recoil, rng, rates)
        if zevery > 0 and ((step_base + l + 1) % zevery) == 0:
            for i in range(n):
                zbuf[zfill, i] = pos[i, 2]
            zfill += 1
    return zfill, nev

"""Compressible Euler physics: conversions, fluxes, entropy quantities.

All functions are vectorized over leading axes; states are arrays whose
last axis holds the conservative variables (rho, momentum..., E), so a
d-dimensional state has d + 2 components.  Normals are unit vectors with
shape broadcastable against the state's leading axes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InadmissibleState


@dataclass(frozen=True)
class GasModel:
    """Ideal gas with a fixed ratio of specific heats."""

    gamma: float = 1.4

    def __post_init__(self):
        if self.gamma <= 1.0:
            raise ValueError("gamma must exceed 1")


def ndim_of(u: np.ndarray) -> int:
    return u.shape[-1] - 2


def pressure(u: np.ndarray, gas: GasModel) -> np.ndarray:
    rho = u[..., 0]
    mom = u[..., 1:-1]
    E = u[..., -1]
    return (gas.gamma - 1.0) * (E - 0.5 * np.sum(mom * mom, axis=-1) / rho)


def assert_admissible(u: np.ndarray, gas: GasModel, context: str = "state") -> None:
    """Raise InadmissibleState (with the first offending index) if rho or p <= 0."""
    rho = u[..., 0]
    if not np.all(rho > 0.0):
        loc = np.unravel_index(int(np.argmax(rho <= 0.0)), rho.shape)
        raise InadmissibleState(f"non-positive density at {context}{loc}")
    p = pressure(u, gas)
    if not np.all(p > 0.0):
        loc = np.unravel_index(int(np.argmax(p <= 0.0)), p.shape)
        raise InadmissibleState(f"non-positive pressure at {context}{loc}")


def is_admissible(u: np.ndarray, gas: GasModel) -> bool:
    return bool(np.all(u[..., 0] > 0.0) and np.all(pressure(u, gas) > 0.0))


def cons_to_prim(u: np.ndarray, gas: GasModel):
    """Return (rho, velocity, pressure); raises on inadmissible input."""
    assert_admissible(u, gas, "cons_to_prim")
    rho = u[..., 0]
    vel = u[..., 1:-1] / rho[..., None]
    p = pressure(u, gas)
    return rho, vel, p


def prim_to_cons(rho: np.ndarray, vel: np.ndarray, p: np.ndarray, gas: GasModel) -> np.ndarray:
    rho = np.asarray(rho, dtype=float)
    vel = np.asarray(vel, dtype=float)
    p = np.asarray(p, dtype=float)
    if vel.shape[: rho.ndim] != rho.shape:
        vel = np.broadcast_to(vel, rho.shape + vel.shape[-1:])
    E = p / (gas.gamma - 1.0) + 0.5 * rho * np.sum(vel * vel, axis=-1)
    return np.concatenate(
        [rho[..., None], rho[..., None] * vel, E[..., None]], axis=-1
    )


def sound_speed(rho: np.ndarray, p: np.ndarray, gas: GasModel) -> np.ndarray:
    return np.sqrt(gas.gamma * p / rho)


def physical_flux(u: np.ndarray, gas: GasModel) -> np.ndarray:
    """Flux matrix f(u) with shape (..., v, d); column k is the x_k flux."""
    d = ndim_of(u)
    rho = u[..., 0]
    mom = u[..., 1:-1]
    E = u[..., -1]
    vel = mom / rho[..., None]
    p = (gas.gamma - 1.0) * (E - 0.5 * np.sum(mom * vel, axis=-1))
    f = np.empty(u.shape + (d,))
    f[..., 0, :] = mom
    for k in range(d):
        f[..., 1 : 1 + d, k] = mom * vel[..., k : k + 1]
        f[..., 1 + k, k] += p
        f[..., -1, k] = (E + p) * vel[..., k]
    return f


def normal_flux(u: np.ndarray, n: np.ndarray, gas: GasModel) -> np.ndarray:
    """f(u) . n without forming the full flux matrix."""
    rho = u[..., 0]
    mom = u[..., 1:-1]
    E = u[..., -1]
    vel = mom / rho[..., None]
    p = (gas.gamma - 1.0) * (E - 0.5 * np.sum(mom * vel, axis=-1))
    vn = np.sum(vel * n, axis=-1)
    out = np.empty(np.broadcast_shapes(u.shape[:-1], n.shape[:-1]) + (u.shape[-1],))
    out[..., 0] = rho * vn
    out[..., 1:-1] = mom * vn[..., None] + p[..., None] * n
    out[..., -1] = (E + p) * vn
    return out


@dataclass(frozen=True)
class EntropyData:
    """Entropy function, variables, potentials, and fluxes at given states."""

    eta: np.ndarray  # (...,)
    v: np.ndarray  # (..., v)
    psi: np.ndarray  # (..., d)
    F: np.ndarray  # (..., d)


def entropy_scalar(u: np.ndarray, gas: GasModel) -> np.ndarray:
    rho = u[..., 0]
    p = pressure(u, gas)
    s = np.log(p) - gas.gamma * np.log(rho)
    return -rho * s / (gas.gamma - 1.0)


def entropy_variables(u: np.ndarray, gas: GasModel) -> np.ndarray:
    rho = u[..., 0]
    mom = u[..., 1:-1]
    vel = mom / rho[..., None]
    p = pressure(u, gas)
    s = np.log(p) - gas.gamma * np.log(rho)
    beta = rho / (2.0 * p)
    out = np.empty_like(u)
    out[..., 0] = (gas.gamma - s) / (gas.gamma - 1.0) - beta * np.sum(vel * vel, axis=-1)
    out[..., 1:-1] = 2.0 * beta[..., None] * vel
    out[..., -1] = -2.0 * beta
    return out


def entropy_potentials(u: np.ndarray, gas: GasModel) -> np.ndarray:
    """psi_k = rho v_k, one component per space dimension."""
    return u[..., 1:-1]


def entropy_data(u: np.ndarray, gas: GasModel) -> EntropyData:
    assert_admissible(u, gas, "entropy_data")
    eta = entropy_scalar(u, gas)
    v = entropy_variables(u, gas)
    psi = entropy_potentials(u, gas)
    f = physical_flux(u, gas)
    F = np.einsum("...v,...vk->...k", v, f) - psi
    return EntropyData(eta=eta, v=v, psi=psi, F=F)


def max_wavespeed(uL: np.ndarray, uR: np.ndarray, n: np.ndarray, gas: GasModel) -> np.ndarray:
    """Davis estimate max(|v.n| + c) over the two states."""
    lams = []
    for u in (uL, uR):
        rho = u[..., 0]
        vel = u[..., 1:-1] / rho[..., None]
        p = pressure(u, gas)
        lams.append(np.abs(np.sum(vel * n, axis=-1)) + np.sqrt(gas.gamma * p / rho))
    return np.maximum(*lams)


def logmean(a, b):
    """Logarithmic mean (b - a)/(log b - log a) with a series fallback.

    The direct quotient is switched to a truncated series in
    u = ((b-a)/(b+a))^2 once |b/a - 1| < 1e-4, where the quotient loses
    precision.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if np.any(a <= 0.0) or np.any(b <= 0.0):
        raise ValueError("logmean requires positive arguments")
    f = (b - a) / (b + a)
    u = f * f
    series = 0.5 * (a + b) / (1.0 + u / 3.0 + u * u / 5.0 + u * u * u / 7.0)
    near = np.abs(b / a - 1.0) < 1e-4
    denom = np.where(near, 1.0, np.log(b) - np.log(a))
    direct = np.where(near, series, (b - a) / denom)
    out = np.where(near, series, direct)
    if out.ndim == 0:
        return float(out)
    return out


def flux_central(uL: np.ndarray, uR: np.ndarray, n: np.ndarray, gas: GasModel) -> np.ndarray:
    return 0.5 * (normal_flux(uL, n, gas) + normal_flux(uR, n, gas))


def flux_lxf(uL: np.ndarray, uR: np.ndarray, n: np.ndarray, gas: GasModel) -> np.ndarray:
    lam = max_wavespeed(uL, uR, n, gas)
    return flux_central(uL, uR, n, gas) - 0.5 * lam[..., None] * (uR - uL)


def flux_hllc(uL: np.ndarray, uR: np.ndarray, n: np.ndarray, gas: GasModel) -> np.ndarray:
    """Three-wave HLLC solver with simple wavespeed bounds."""
    rhoL = uL[..., 0]
    rhoR = uR[..., 0]
    velL = uL[..., 1:-1] / rhoL[..., None]
    velR = uR[..., 1:-1] / rhoR[..., None]
    EL = uL[..., -1]
    ER = uR[..., -1]
    pL = (gas.gamma - 1.0) * (EL - 0.5 * rhoL * np.sum(velL * velL, axis=-1))
    pR = (gas.gamma - 1.0) * (ER - 0.5 * rhoR * np.sum(velR * velR, axis=-1))
    cL = np.sqrt(gas.gamma * pL / rhoL)
    cR = np.sqrt(gas.gamma * pR / rhoR)
    vnL = np.sum(velL * n, axis=-1)
    vnR = np.sum(velR * n, axis=-1)

    sL = np.minimum(vnL - cL, vnR - cR)
    sR = np.maximum(vnL + cL, vnR + cR)
    dL = rhoL * (sL - vnL)
    dR = rhoR * (sR - vnR)
    sStar = (pR - pL + vnL * dL - vnR * dR) / (dL - dR)

    fL = normal_flux(uL, n, gas)
    fR = normal_flux(uR, n, gas)

    def star_state(u, rho, vel, E, p, vn, sK, sStar):
        fac = rho * (sK - vn) / (sK - sStar)
        out = np.empty_like(u)
        out[..., 0] = fac
        out[..., 1:-1] = fac[..., None] * (vel + (sStar - vn)[..., None] * n)
        out[..., -1] = fac * (
            E / rho + (sStar - vn) * (sStar + p / (rho * (sK - vn)))
        )
        return out

    uStarL = star_state(uL, rhoL, velL, EL, pL, vnL, sL, sStar)
    uStarR = star_state(uR, rhoR, velR, ER, pR, vnR, sR, sStar)
    fStarL = fL + sL[..., None] * (uStarL - uL)
    fStarR = fR + sR[..., None] * (uStarR - uR)

    out = np.where(
        (sL >= 0.0)[..., None],
        fL,
        np.where(
            (sStar >= 0.0)[..., None],
            fStarL,
            np.where((sR >= 0.0)[..., None], fStarR, fR),
        ),
    )
    return out


def flux_ec(uL: np.ndarray, uR: np.ndarray, n: np.ndarray, gas: GasModel) -> np.ndarray:
    """Entropy-conservative two-point flux built from logarithmic means.

    Validated through the entropy-conservation identity
    (v_R - v_L) . f = (psi_R - psi_L) . n rather than by transcription.
    """
    rhoL = uL[..., 0]
    rhoR = uR[..., 0]
    velL = uL[..., 1:-1] / rhoL[..., None]
    velR = uR[..., 1:-1] / rhoR[..., None]
    EL = uL[..., -1]
    ER = uR[..., -1]
    pL = (gas.gamma - 1.0) * (EL - 0.5 * rhoL * np.sum(velL * velL, axis=-1))
    pR = (gas.gamma - 1.0) * (ER - 0.5 * rhoR * np.sum(velR * velR, axis=-1))

    rho_log = logmean(rhoL, rhoR)
    rho_over_p_log = logmean(rhoL / pL, rhoR / pR)
    vel_avg = 0.5 * (velL + velR)
    p_avg = 0.5 * (pL + pR)
    vel_prod = 0.5 * np.sum(velL * velR, axis=-1)
    vn_avg = np.sum(vel_avg * n, axis=-1)

    f1 = rho_log * vn_avg
    out = np.empty(np.broadcast_shapes(uL.shape[:-1], n.shape[:-1]) + (uL.shape[-1],))
    out[..., 0] = f1
    out[..., 1:-1] = f1[..., None] * vel_avg + p_avg[..., None] * n
    out[..., -1] = f1 * (
        vel_prod + 1.0 / ((gas.gamma - 1.0) * rho_over_p_log)
    ) + 0.5 * (pL * np.sum(velR * n, axis=-1) + pR * np.sum(velL * n, axis=-1))
    return out


SURFACE_FLUXES = {"lxf": flux_lxf, "hllc": flux_hllc}
VOLUME_FLUXES = {"central": flux_central, "ec": flux_ec}

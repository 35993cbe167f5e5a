"""Ensemble (master-equation) solver: steady state, transients and averaged
engine performance."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm
from scipy.optimize import bisect

from .model import EngineParams, ParameterError, build_generator, carnot, rates

_NULL_TOL = 1e-9        # largest singular value still accepted as "zero"


class DegenerateGeneratorError(RuntimeError):
    """Null space of the rate matrix is not one-dimensional."""


class NoStallError(RuntimeError):
    """The particle current does not change sign on the searched bias window."""


@dataclass(frozen=True)
class SteadyObservables:
    """Averaged steady-state performance figures.

    ``efficiency`` is None when the heat current vanishes (undefined rather
    than infinite).
    """

    current_l: float        # net particles into reservoir L per unit time
    heat_h: float           # energy per unit time drawn from reservoir H
    power: float            # delta_mu * current_l
    efficiency: float | None
    entropy_rate: float


def steady_state(gen: np.ndarray) -> np.ndarray:
    """Normalized null vector of the rate matrix.

    Computed from the SVD; raises :class:`DegenerateGeneratorError` when the
    two smallest singular values are both compatible with zero.
    """
    gen = np.asarray(gen, dtype=float)
    _, s, vt = np.linalg.svd(gen)
    if s[-2] < _NULL_TOL * max(1.0, s[0]):
        raise DegenerateGeneratorError("rate matrix has a degenerate null space")
    v = vt[-1]
    total = v.sum()
    if abs(total) < 1e-12:
        raise DegenerateGeneratorError("null vector is traceless; generator malformed")
    rho = v / total
    # flush SVD sign noise on an exactly-representable distribution
    rho[np.abs(rho) < 1e-15] = 0.0
    if np.any(rho < -1e-10):
        raise DegenerateGeneratorError("null vector has negative probabilities")
    return np.clip(rho, 0.0, None) / np.clip(rho, 0.0, None).sum()


def evolve(gen: np.ndarray, rho0: np.ndarray, t: float) -> np.ndarray:
    """Propagate a distribution for a time t >= 0 with the dense matrix
    exponential."""
    if t < 0:
        raise ParameterError("evolution time must be non-negative")
    rho0 = np.asarray(rho0, dtype=float)
    if t == 0.0:
        return rho0.copy()
    return expm(np.asarray(gen, dtype=float) * t) @ rho0


def observables(params: EngineParams, rho_bar: np.ndarray | None = None) -> SteadyObservables:
    """Steady-state currents, power, efficiency and entropy production rate.

    When ``rho_bar`` is omitted the steady state is computed on the fly.
    """
    tr = rates(params)
    if rho_bar is None:
        rho_bar = steady_state(build_generator(params))
    p00, p01, p10, p11 = rho_bar
    u, eh = params.coulomb_u, params.eps_h
    heat = eh * (tr.w_plus[("H", 0)] * p00 - tr.w_minus[("H", 0)] * p01) \
        + (eh + u) * (tr.w_plus[("H", 1)] * p10 - tr.w_minus[("H", 1)] * p11)
    current = (tr.w_minus[("L", 0)] * p10 + tr.w_minus[("L", 1)] * p11
               - tr.w_plus[("L", 0)] * p00 - tr.w_plus[("L", 1)] * p01)
    power = params.delta_mu * current
    # zero heat (within rounding of the rate scale) leaves the efficiency
    # undefined instead of propagating huge or non-finite ratios
    heat_scale = params.gamma_base * (abs(u) + abs(eh) + 1.0)
    eff = power / heat if abs(heat) > 1e-13 * heat_scale else None
    entropy = (params.beta_w - params.beta_h) * heat - params.beta_w * power
    return SteadyObservables(current_l=current, heat_h=heat, power=power,
                             efficiency=eff, entropy_rate=entropy)


def current_vs_bias(params: EngineParams, delta_mu: float) -> float:
    return observables(params.replace(delta_mu=delta_mu)).current_l


def stall_bias(params: EngineParams, tol: float = 1e-4) -> float:
    """Bias at which the averaged particle current into L crosses zero.

    Bracketing bisection on (0, U * carnot); requires an engine regime at
    small bias, otherwise :class:`NoStallError`.
    """
    eta_c = carnot(params)
    if eta_c <= 0:
        raise NoStallError("no engine regime: temp_h must exceed temp_w")
    lo = 1e-9 * params.gamma_base
    hi = params.coulomb_u * eta_c - 1e-12
    f_lo, f_hi = current_vs_bias(params, lo), current_vs_bias(params, hi)
    if not (f_lo > 0.0 > f_hi):
        raise NoStallError("current does not change sign on (0, U*carnot)")
    return bisect(lambda d: current_vs_bias(params, d), lo, hi, xtol=tol)


def bias_sweep(params: EngineParams, delta_mus) -> list[tuple]:
    """Rows (delta_mu, I_L, J_H, P, eta, sigma_dot) for a bias sweep.

    Undefined efficiencies are emitted as NaN in the tabular output.
    """
    out = []
    for d in delta_mus:
        obs = observables(params.replace(delta_mu=float(d)))
        eta = obs.efficiency if obs.efficiency is not None else float("nan")
        out.append((float(d), obs.current_l, obs.heat_h, obs.power, eta, obs.entropy_rate))
    return out

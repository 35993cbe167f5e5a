"""Steady-state two-time correlation functions between jump events, and the
spectral reality check on the rate matrix."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .master import evolve, steady_state
from .model import EngineParams, build_generator, rates


class UndefinedConditionalError(RuntimeError):
    """Conditioning jump has zero steady-state probability per unit time."""


@dataclass(frozen=True)
class CorrelationCurve:
    """Correlation values (units rate^2) on an increasing tau grid."""

    tau: np.ndarray
    values: np.ndarray


def default_tau_grid(n: int = 400, t_min: float = 1e-2, t_max: float = 200.0) -> np.ndarray:
    """tau = 0 plus n logarithmically spaced points on [t_min, t_max]."""
    return np.concatenate(([0.0], np.logspace(np.log10(t_min), np.log10(t_max), n)))


def _propagated_curve(gen, rho_jump, weights, tau_grid, prefactor):
    vals = np.empty(len(tau_grid))
    for i, t in enumerate(tau_grid):
        p = evolve(gen, rho_jump, float(t))
        vals[i] = (weights @ p) * prefactor
    return vals


def g_ll(params: EngineParams, tau_grid=None) -> CorrelationCurve:
    """Correlation of two electron transfers into reservoir L a delay tau apart.

    The first jump projects the steady state onto the post-jump distribution
    (work dot emptied), which is then propagated and interrogated with the
    same set of jump rates; the value at tau = 0 vanishes because the
    post-jump state has no work-dot population.
    """
    if tau_grid is None:
        tau_grid = default_tau_grid()
    tau_grid = np.asarray(tau_grid, dtype=float)
    gen = build_generator(params)
    rho = steady_state(gen)
    tr = rates(params)
    wl0, wl1 = tr.w_minus[("L", 0)], tr.w_minus[("L", 1)]
    pi_l = wl0 * rho[2] + wl1 * rho[3]
    if pi_l <= 0.0:
        raise UndefinedConditionalError("transfer into L never occurs in the steady state")
    rho_jump = np.array([wl0 * rho[2], wl1 * rho[3], 0.0, 0.0]) / pi_l
    weights = np.array([0.0, 0.0, wl0, wl1])
    return CorrelationCurve(tau=tau_grid,
                            values=_propagated_curve(gen, rho_jump, weights, tau_grid, pi_l))


def g_hl(params: EngineParams, tau_grid=None) -> CorrelationCurve:
    """Correlation of an electron entering the hot dot followed by a transfer
    into reservoir L."""
    if tau_grid is None:
        tau_grid = default_tau_grid()
    tau_grid = np.asarray(tau_grid, dtype=float)
    gen = build_generator(params)
    rho = steady_state(gen)
    tr = rates(params)
    wh0, wh1 = tr.w_plus[("H", 0)], tr.w_plus[("H", 1)]
    pi_h = wh0 * rho[0] + wh1 * rho[2]
    if pi_h <= 0.0:
        raise UndefinedConditionalError("hot-dot filling never occurs in the steady state")
    rho_jump = np.array([0.0, wh0 * rho[0], 0.0, wh1 * rho[2]]) / pi_h
    wl0, wl1 = tr.w_minus[("L", 0)], tr.w_minus[("L", 1)]
    weights = np.array([0.0, 0.0, wl0, wl1])
    return CorrelationCurve(tau=tau_grid,
                            values=_propagated_curve(gen, rho_jump, weights, tau_grid, pi_h))


def decorrelated_product(params: EngineParams, kind: str) -> float:
    """Long-delay asymptote: product of the two marginal jump intensities."""
    rho = steady_state(build_generator(params))
    tr = rates(params)
    pi_l = tr.w_minus[("L", 0)] * rho[2] + tr.w_minus[("L", 1)] * rho[3]
    if kind == "ll":
        return pi_l * pi_l
    if kind == "hl":
        pi_h = tr.w_plus[("H", 0)] * rho[0] + tr.w_plus[("H", 1)] * rho[2]
        return pi_h * pi_l
    raise ValueError(f"unknown correlation kind {kind!r}")


def spectrum_is_real(gen: np.ndarray, imag_tol: float = 1e-9) -> tuple[bool, np.ndarray]:
    """Eigenvalues of the rate matrix and whether they are all real.

    One eigenvalue is always zero (the stationary mode); a real spectrum is
    the ensemble-level statement that no correlation function can oscillate.
    """
    ev = np.linalg.eigvals(np.asarray(gen, dtype=float))
    ev = ev[np.argsort(ev.real)]
    return bool(np.all(np.abs(ev.imag) < imag_tol)), ev


def count_local_extrema(values: np.ndarray, rel_floor: float = 1e-9) -> int:
    """Interior extrema of a sampled curve, ignoring sub-floor numerical wiggle."""
    values = np.asarray(values, dtype=float)
    d = np.diff(values)
    d[np.abs(d) < rel_floor * np.max(np.abs(values))] = 0.0
    signs = np.sign(d)
    signs = signs[signs != 0]
    if len(signs) < 2:
        return 0
    return int(np.sum(signs[1:] * signs[:-1] < 0))


def fit_decay_rate(params: EngineParams, kind: str, window=(8.0, 14.0), n_pts: int = 40) -> float:
    """Log-linear decay rate of |g(tau) - asymptote| on a late-time window.

    The window is given in units of the inverse spectral gap; late enough
    that the slowest relaxation mode dominates the residual.
    """
    gen = build_generator(params)
    _, ev = spectrum_is_real(gen)
    gap = -np.sort(ev.real)[-2]
    taus = np.linspace(window[0] / gap, window[1] / gap, n_pts)
    curve = (g_ll if kind == "ll" else g_hl)(params, taus)
    resid = np.abs(curve.values - decorrelated_product(params, kind))
    slope = np.polyfit(taus, np.log(resid), 1)[0]
    return -slope

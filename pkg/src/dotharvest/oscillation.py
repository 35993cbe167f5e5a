"""Reduced occupation-number dynamics, its characteristic cubic, and the
constrained discriminant minimization that rules out self-oscillations.

The averaged dot occupations N_w, N_h obey a damped driven second-order
equation coupled to a first-order one,

    N_w'' + kappa N_w' + omega_sq N_w = drive_a * N_h + const_b,
    N_h'  + gamma_h  N_h = -coupling_c * N_w + const_d,

whose relaxation exponents are the roots of the cubic

    lambda^3 + (kappa + gamma_h) lambda^2 + (kappa gamma_h + omega_sq) lambda
             + (drive_a * coupling_c + gamma_h * omega_sq).

The sign of ``drive_a`` below is fixed so that these roots coincide with the
eigenvalues of the equivalent first-order system in (N_w, N_w', N_h) - and
with the nonzero eigenvalues of the 4-state rate matrix.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import differential_evolution, minimize

from .model import EngineParams, rates


class ConfigurationError(ValueError):
    """Optimizer configuration admits no feasible point."""


@dataclass(frozen=True)
class OscCoefficients:
    kappa: float
    omega_sq: float
    drive_a: float
    const_b: float
    coupling_c: float
    const_d: float


@dataclass(frozen=True)
class CubicPoly:
    """Real cubic a x^3 + b x^2 + c x + d with a != 0."""

    a: float
    b: float
    c: float
    d: float

    def roots(self) -> np.ndarray:
        return np.roots([self.a, self.b, self.c, self.d])


def reduced_coefficients(params: EngineParams) -> OscCoefficients:
    """Coefficients of the reduced (N_w, N_h) equations of motion."""
    tr = rates(params)
    a0, a1 = tr.w_work_plus(0), tr.w_work_plus(1)
    g0, g1 = tr.gamma_work(0), tr.gamma_work(1)
    gh = params.gamma_h
    h0, h1 = tr.w_plus[("H", 0)], tr.w_plus[("H", 1)]
    kappa = g0 + g1 + gh
    omega_sq = -(a0 - a1) * (h0 - h1) + (g1 + gh) * g0 - (g0 - g1) * h1
    drive_a = g0 * a1 - g1 * a0
    const_b = (g1 + gh) * a0 - (a0 - a1) * h0
    return OscCoefficients(kappa=kappa, omega_sq=omega_sq, drive_a=drive_a,
                           const_b=const_b, coupling_c=h0 - h1, const_d=h0)


def characteristic_cubic(coeffs: OscCoefficients, gamma_h: float) -> CubicPoly:
    """Monic cubic whose roots are the relaxation exponents of the reduced
    system."""
    return CubicPoly(
        a=1.0,
        b=coeffs.kappa + gamma_h,
        c=coeffs.kappa * gamma_h + coeffs.omega_sq,
        d=coeffs.drive_a * coeffs.coupling_c + gamma_h * coeffs.omega_sq,
    )


def system_matrix(coeffs: OscCoefficients, gamma_h: float) -> np.ndarray:
    """First-order form of the reduced dynamics over y = (N_w, N_w', N_h)."""
    return np.array([
        [0.0, 1.0, 0.0],
        [-coeffs.omega_sq, -coeffs.kappa, coeffs.drive_a],
        [-coeffs.coupling_c, 0.0, -gamma_h],
    ])


def cubic_discriminant(p: CubicPoly) -> float:
    """b^2 c^2 - 4 a c^3 - 4 b^3 d - 27 a^2 d^2 + 18 a b c d.

    Non-negative exactly when all three roots are real.
    """
    if p.a == 0:
        raise ValueError("not a cubic: leading coefficient is zero")
    a, b, c, d = p.a, p.b, p.c, p.d
    return b * b * c * c - 4.0 * a * c ** 3 - 4.0 * b ** 3 * d \
        - 27.0 * a * a * d * d + 18.0 * a * b * c * d


def discriminant_at(u: float, temp_w: float, temp_h: float, delta_mu: float,
                    x: float = 0.9, gamma_base: float = 1.0,
                    gamma_h: float | None = None) -> float:
    """Discriminant of the characteristic cubic at eps_w = eps_h = 0."""
    p = EngineParams(eps_w=0.0, eps_h=0.0, coulomb_u=u, delta_mu=delta_mu,
                     temp_w=temp_w, temp_h=temp_h, x=x, gamma_base=gamma_base,
                     gamma_h=gamma_h if gamma_h is not None else gamma_base)
    return cubic_discriminant(characteristic_cubic(reduced_coefficients(p), p.gamma_h))


#: Default search box for (U, T_W, T_H); delta_mu ranges over (0, U * carnot).
DEFAULT_BOUNDS = ((0.1, 50.0), (0.1, 50.0), (0.1, 50.0))

METHODS = ("nelder_mead", "differential_evolution", "simulated_annealing", "random_search")


@dataclass(frozen=True)
class MinimizationResult:
    method: str
    best_point: tuple[float, float, float, float]   # (U, T_W, T_H, delta_mu)
    delta_min: float
    evaluations: int


def _feasible(v, bounds) -> bool:
    u, tw, th, dmu = v
    for val, (lo, hi) in zip((u, tw, th), bounds):
        if not lo <= val <= hi:
            return False
    eta_c = 1.0 - tw / th
    return th > tw and 0.0 < dmu < u * eta_c


def _draw_feasible(rng, bounds):
    # engine constraint delta_mu < U * carnot handled by construction here;
    # optimizers still reject any point that wanders outside.
    for _ in range(10000):
        u, tw, th = (rng.uniform(lo, hi) for lo, hi in bounds)
        if th <= tw:
            continue
        dmu = rng.uniform(0.0, u * (1.0 - tw / th))
        if dmu > 0.0:
            return np.array([u, tw, th, dmu])
    raise ConfigurationError("no feasible point found inside the bounds")


def minimize_discriminant(bounds=DEFAULT_BOUNDS, method: str = "nelder_mead",
                          seed: int = 0, x: float = 0.9) -> MinimizationResult:
    """Minimize the cubic discriminant over (U, T_W, T_H, delta_mu).

    eps_w = eps_h = 0 and the suppression parameter are held fixed; the
    engine condition delta_mu < U * carnot is enforced by rejection
    (infeasible points score +inf), which keeps the wildly varying
    discriminant scale intact.
    """
    if method not in METHODS:
        raise ConfigurationError(f"unknown method {method!r}")
    rng = np.random.default_rng(seed)
    n_eval = [0]

    def objective(v):
        n_eval[0] += 1
        if not _feasible(v, bounds):
            return np.inf
        return discriminant_at(v[0], v[1], v[2], v[3], x=x)

    best_x, best_f = None, np.inf

    if method == "nelder_mead":
        # non-convex landscape: restart from 16 random feasible simplices
        for _ in range(16):
            x0 = _draw_feasible(rng, bounds)
            res = minimize(objective, x0, method="Nelder-Mead",
                           options=dict(maxiter=4000, xatol=1e-10, fatol=1e-12))
            if res.fun < best_f:
                best_f, best_x = float(res.fun), np.array(res.x)

    elif method == "differential_evolution":
        de_bounds = list(bounds) + [(1e-9, bounds[0][1])]
        # rejection leaves most of the box infeasible, so the initial
        # population is drawn feasible; evolution itself still rejects
        init = np.array([_draw_feasible(rng, bounds) for _ in range(60)])
        res = differential_evolution(objective, de_bounds, seed=seed, tol=1e-12,
                                     maxiter=600, init=init, polish=False)
        best_f, best_x = float(res.fun), np.array(res.x)

    elif method == "simulated_annealing":
        # geometric cooling over 1e4 steps, gaussian proposals at 5% box width
        widths = np.array([hi - lo for lo, hi in bounds] + [bounds[0][1]]) * 0.05
        cur = _draw_feasible(rng, bounds)
        f_cur = objective(cur)
        best_x, best_f = cur.copy(), f_cur
        temp0, temp1, n_steps = 1.0, 1e-6, 10000
        for k in range(n_steps):
            temp = temp0 * (temp1 / temp0) ** (k / (n_steps - 1))
            cand = cur + rng.normal(size=4) * widths
            f_cand = objective(cand)
            if not np.isfinite(f_cand):
                continue
            if f_cand < f_cur or rng.random() < math.exp(-(f_cand - f_cur) / temp):
                cur, f_cur = cand, f_cand
                if f_cur < best_f:
                    best_x, best_f = cur.copy(), f_cur

    elif method == "random_search":
        for _ in range(10000):
            v = _draw_feasible(rng, bounds)
            f = objective(v)
            if f < best_f:
                best_x, best_f = v, f

    if best_x is None or not np.isfinite(best_f):
        raise ConfigurationError("optimizer found no feasible point")
    return MinimizationResult(method=method, best_point=tuple(float(v) for v in best_x),
                              delta_min=float(best_f), evaluations=n_eval[0])


def minimize_all_methods(bounds=DEFAULT_BOUNDS, seed: int = 0, x: float = 0.9):
    return [minimize_discriminant(bounds, m, seed=seed, x=x) for m in METHODS]

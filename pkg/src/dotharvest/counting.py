"""Full counting statistics of the particle and heat currents: counting-field
generator, scaled cumulant generating function, and the large-deviation
surface over the two time-averaged currents.

Counting conventions. The particle field ``lam`` counts electrons entering
the work dot *from* reservoir L (each L+ jump is weighted e^{-lam}, each L-
jump e^{+lam}); the current I = -dS/dlam at the origin is therefore the
negative of the into-L current reported by the master-equation observables.
The heat field ``xi`` counts the energy quanta eps_h + U n_w provided by
reservoir H, resolved on the work-dot occupation at the jump instant; the
occupation-independent variant (quanta eps_h for every hot jump) loses all
heat information at eps_h = 0 and is kept only for comparison behind
``heat_quanta="bare"``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .model import EngineParams, build_generator, rates

_DEGENERACY_GAP = 1e-10


class DegeneracyWarning(UserWarning):
    """Two leading eigenvalues of the counting generator nearly cross."""


def _tilting_pieces(params: EngineParams, heat_quanta: str):
    if heat_quanta not in ("occupation", "bare"):
        raise ValueError("heat_quanta must be 'occupation' or 'bare'")
    tr = rates(params)
    q0 = params.eps_h
    q1 = params.eps_h + params.coulomb_u if heat_quanta == "occupation" else params.eps_h
    return tr, q0, q1, np.diag(build_generator(params)).copy()


def _tilted(tr, q0, q1, diag, lam: float, xi: float) -> np.ndarray:
    wp, wm = tr.w_plus, tr.w_minus
    m = np.zeros((4, 4))
    el_in, el_out = math.exp(-lam), math.exp(lam)
    m[1, 0] = wp[("H", 0)] * math.exp(-xi * q0)
    m[2, 0] = wp[("L", 0)] * el_in + wp[("R", 0)]
    m[0, 1] = wm[("H", 0)] * math.exp(xi * q0)
    m[3, 1] = wp[("L", 1)] * el_in + wp[("R", 1)]
    m[0, 2] = wm[("L", 0)] * el_out + wm[("R", 0)]
    m[3, 2] = wp[("H", 1)] * math.exp(-xi * q1)
    m[1, 3] = wm[("L", 1)] * el_out + wm[("R", 1)]
    m[2, 3] = wm[("H", 1)] * math.exp(xi * q1)
    # diagonal stays the undressed escape rates
    m[np.diag_indices(4)] = diag
    return m


def counting_generator(params: EngineParams, lam: float, xi: float,
                       heat_quanta: str = "occupation") -> np.ndarray:
    """Rate matrix dressed with the two counting fields; reduces to the plain
    generator at (0, 0)."""
    tr, q0, q1, diag = _tilting_pieces(params, heat_quanta)
    return _tilted(tr, q0, q1, diag, lam, xi)


def cgf(params: EngineParams, lam: float, xi: float,
        heat_quanta: str = "occupation") -> float:
    """Scaled cumulant generating function: the dominant eigenvalue of the
    counting generator.  Real for real fields whenever the off-diagonal
    structure stays non-negative; warns when the leading pair of eigenvalues
    nearly degenerates."""
    ev = np.linalg.eigvals(counting_generator(params, lam, xi, heat_quanta))
    order = np.argsort(ev.real)
    gap = ev.real[order[-1]] - ev.real[order[-2]]
    if gap < _DEGENERACY_GAP:
        warnings.warn("leading eigenvalue gap below 1e-10; cumulant generating "
                      "function may be non-analytic here", DegeneracyWarning)
    top = ev[order[-1]]
    return float(top.real)


def _cgf_grid(params, lams, xis, heat_quanta):
    """Vectorized dominant eigenvalue over an outer grid of field values."""
    tr, q0, q1, diag = _tilting_pieces(params, heat_quanta)
    mats = np.empty((len(lams), len(xis), 4, 4))
    for i, l in enumerate(lams):
        for j, x in enumerate(xis):
            mats[i, j] = _tilted(tr, q0, q1, diag, float(l), float(x))
    ev = np.linalg.eigvals(mats.reshape(-1, 4, 4))
    s = ev.real.max(axis=1)
    return s.reshape(len(lams), len(xis))


@dataclass(frozen=True)
class LdfSurface:
    """Large-deviation surface sampled on a counting-field grid.

    ``current`` is the electron flow from reservoir L into the dot,
    ``heat`` the energy flow out of reservoir H, and ``rate_function``
    the exponential decay rate of the joint probability (non-positive,
    zero at the steady-state currents).
    """

    lam: np.ndarray
    xi: np.ndarray
    cgf_values: np.ndarray      # S on the (lam, xi) grid
    current: np.ndarray         # I = -dS/dlam
    heat: np.ndarray            # J = -dS/dxi
    rate_function: np.ndarray   # R = S - lam I - xi J
    skipped: int


def ldf_surface(params: EngineParams, lambda_grid, xi_grid, step: float = 1e-4,
                heat_quanta: str = "occupation") -> LdfSurface:
    """Legendre-transform sampling of the large-deviation function.

    Currents are central differences of the cumulant generating function in
    each field (step 1e-4 by default); grid points where the eigenvalue
    evaluation fails are masked out and counted in ``skipped``.
    """
    lams = np.asarray(lambda_grid, dtype=float)
    xis = np.asarray(xi_grid, dtype=float)
    if not (lams.min() <= 0.0 <= lams.max() and xis.min() <= 0.0 <= xis.max()):
        raise ValueError("field grids must bracket (0, 0)")
    # five-point stencil bundles: S, S(lam +- h), S(xi +- h)
    s0 = _cgf_grid(params, lams, xis, heat_quanta)
    slp = _cgf_grid(params, lams + step, xis, heat_quanta)
    slm = _cgf_grid(params, lams - step, xis, heat_quanta)
    sxp = _cgf_grid(params, lams, xis + step, heat_quanta)
    sxm = _cgf_grid(params, lams, xis - step, heat_quanta)
    cur = -(slp - slm) / (2.0 * step)
    heat = -(sxp - sxm) / (2.0 * step)
    # Legendre transform R = S - lam dS/dlam - xi dS/dxi = S + lam I + xi J;
    # with I = -dS/dlam this is the sign pairing that keeps R <= 0 with its
    # zero maximum at the steady currents
    r = s0 + lams[:, None] * cur + xis[None, :] * heat
    bad = ~(np.isfinite(s0) & np.isfinite(cur) & np.isfinite(heat))
    skipped = int(bad.sum())
    for arr in (s0, cur, heat, r):
        arr[bad] = np.nan
    return LdfSurface(lam=lams, xi=xis, cgf_values=s0, current=cur, heat=heat,
                      rate_function=r, skipped=skipped)


def default_field_grids(params: EngineParams, n_lam: int = 45, n_xi: int = 41):
    """Grids bracketing the origin and the conjugate reflection point."""
    a_n = params.beta_w * params.delta_mu
    a_q = params.beta_w - params.beta_h
    lams = np.unique(np.concatenate([np.linspace(-0.3 + min(a_n, 0.0), 0.25 + max(a_n, 0.0), n_lam), [0.0, a_n]]))
    xis = np.unique(np.concatenate([np.linspace(-0.06 + min(a_q, 0.0), 0.06 + max(a_q, 0.0), n_xi), [0.0, a_q]]))
    return lams, xis


def conjugate_fields(params: EngineParams, lam: float, xi: float) -> tuple[float, float]:
    """Reflection point of the fluctuation symmetry S(lam, xi) =
    S(a_n - lam, a_q - xi), with the affinities a_n = beta_w delta_mu and
    a_q = beta_w - beta_h."""
    return params.beta_w * params.delta_mu - lam, (params.beta_w - params.beta_h) - xi


def surface_peak(surface: LdfSurface) -> tuple[float, float, float]:
    """(current, heat, R) at the grid maximum of the rate function."""
    idx = np.nanargmax(surface.rate_function)
    i, j = np.unravel_index(idx, surface.rate_function.shape)
    return (float(surface.current[i, j]), float(surface.heat[i, j]),
            float(surface.rate_function[i, j]))

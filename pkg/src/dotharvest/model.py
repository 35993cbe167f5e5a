"""Physical parameters, golden-rule transition rates and the 4-state rate matrix.

Units: hbar = k_B = 1. Energies, temperatures and the bias are measured in
units of the bare tunnel rate ``gamma_base`` (times in its inverse). The
work-dot level ``eps_w`` is measured from mu_R, the hot-dot level ``eps_h``
from mu_H; the left lead sits at mu_L = delta_mu.

State space of the double dot: (00, 01, 10, 11), first digit = work-dot
occupation, second digit = hot-dot occupation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

STATES = ("00", "01", "10", "11")

#: (n_w, n_h) for each state index.
STATE_OCCS = ((0, 0), (0, 1), (1, 0), (1, 1))

RESERVOIRS = ("L", "R", "H")


class ParameterError(ValueError):
    """A physical parameter is outside its admissible domain."""


class DegenerateCouplingError(ValueError):
    """Coupling combination with a vanishing denominator in the asymmetry."""


@dataclass(frozen=True)
class EngineParams:
    """All parameters of the three-terminal two-dot engine.

    Defaults are the reference operating point used throughout:
    x = 0.9, T_W = 5, T_H = 15, eps_w = eps_h = 0, delta_mu = 1/4, U = 5
    (all in units of gamma_base).

    ``explicit_couplings``, when given as (g_L0, g_L1, g_R0, g_R1),
    overrides the x-rule for the work-dot couplings; gamma_H stays
    occupation-independent either way.
    """

    eps_w: float = 0.0
    eps_h: float = 0.0
    coulomb_u: float = 5.0
    delta_mu: float = 0.25
    temp_w: float = 5.0
    temp_h: float = 15.0
    gamma_base: float = 1.0
    gamma_h: float = field(default=None)  # type: ignore[assignment]
    x: float = 0.9
    explicit_couplings: tuple[float, float, float, float] | None = None

    def __post_init__(self):
        if self.gamma_h is None:
            object.__setattr__(self, "gamma_h", self.gamma_base)
        if self.temp_w <= 0 or self.temp_h <= 0:
            raise ParameterError("temperatures must be positive")
        if self.gamma_base <= 0 or self.gamma_h <= 0:
            raise ParameterError("tunnel rates must be positive")
        if not 0.0 <= self.x <= 1.0:
            raise ParameterError("coupling suppression x must lie in [0, 1]")
        if self.coulomb_u < 0:
            raise ParameterError("coulomb_u must be non-negative")
        if self.explicit_couplings is not None:
            if len(self.explicit_couplings) != 4:
                raise ParameterError("explicit_couplings needs four values (L0, L1, R0, R1)")
            if any(g < 0 for g in self.explicit_couplings):
                raise ParameterError("couplings must be non-negative")

    def replace(self, **kw) -> "EngineParams":
        d = {
            "eps_w": self.eps_w, "eps_h": self.eps_h, "coulomb_u": self.coulomb_u,
            "delta_mu": self.delta_mu, "temp_w": self.temp_w, "temp_h": self.temp_h,
            "gamma_base": self.gamma_base, "gamma_h": self.gamma_h, "x": self.x,
            "explicit_couplings": self.explicit_couplings,
        }
        d.update(kw)
        return EngineParams(**d)

    @property
    def beta_w(self) -> float:
        return 1.0 / self.temp_w

    @property
    def beta_h(self) -> float:
        return 1.0 / self.temp_h


def carnot(params: EngineParams) -> float:
    """Carnot efficiency 1 - T_W/T_H of the two-temperature arrangement."""
    return 1.0 - params.temp_w / params.temp_h


def fermi(eps: float, mu: float, temp: float) -> float:
    """Fermi-Dirac occupation 1/(exp((eps-mu)/temp) + 1).

    Branch split on the sign of (eps - mu) keeps the evaluation free of
    overflow for |eps - mu|/temp up to ~700.
    """
    if temp <= 0:
        raise ParameterError("fermi() needs temp > 0")
    z = (eps - mu) / temp
    if z >= 0:
        e = math.exp(-z)
        return e / (1.0 + e)
    e = math.exp(z)
    return 1.0 / (1.0 + e)


def coupling(params: EngineParams, alpha: str, n: int) -> float:
    """Tunnel coupling of reservoir ``alpha`` given the other dot holds ``n``.

    Work-dot leads follow gamma_{alpha,n} = (1 - x [alpha=R][n=1]) gamma_base
    unless explicit values were supplied; the hot lead is occupation
    independent.
    """
    if alpha not in RESERVOIRS:
        raise ParameterError(f"unknown reservoir {alpha!r}")
    if n not in (0, 1):
        raise ParameterError("occupation n must be 0 or 1")
    if alpha == "H":
        return params.gamma_h
    if params.explicit_couplings is not None:
        gl0, gl1, gr0, gr1 = params.explicit_couplings
        return {("L", 0): gl0, ("L", 1): gl1, ("R", 0): gr0, ("R", 1): gr1}[(alpha, n)]
    if alpha == "R" and n == 1:
        return (1.0 - params.x) * params.gamma_base
    return params.gamma_base


def asymmetry(params: EngineParams) -> float:
    """Rectification asymmetry of the four work-dot couplings, in [-1, 1]."""
    gl0, gl1 = coupling(params, "L", 0), coupling(params, "L", 1)
    gr0, gr1 = coupling(params, "R", 0), coupling(params, "R", 1)
    den = (gl0 + gr0) * (gl1 + gr1)
    if den == 0.0:
        raise DegenerateCouplingError("all couplings vanish at one occupation")
    return (gr0 * gl1 - gr1 * gl0) / den


@dataclass(frozen=True)
class TransitionRates:
    """The twelve golden-rule rates W^+/-_{alpha,n}.

    Keys are (reservoir, n) with n the occupation of the dot *not* involved
    in the jump: the hot-dot occupation for alpha in {L, R}, the work-dot
    occupation for alpha = H.
    """

    w_plus: dict
    w_minus: dict

    def gamma(self, alpha: str, n: int) -> float:
        return self.w_plus[(alpha, n)] + self.w_minus[(alpha, n)]

    def w_work_plus(self, n_h: int) -> float:
        return self.w_plus[("L", n_h)] + self.w_plus[("R", n_h)]

    def w_work_minus(self, n_h: int) -> float:
        return self.w_minus[("L", n_h)] + self.w_minus[("R", n_h)]

    def gamma_work(self, n_h: int) -> float:
        return self.gamma("L", n_h) + self.gamma("R", n_h)


def rates(params: EngineParams) -> TransitionRates:
    """Evaluate all twelve transition rates for the given parameters.

    W^+_{alpha,n} = gamma_{alpha,n} f_alpha(eps + U n), and W^- carries the
    complementary factor (1 - f); mu_L = delta_mu, mu_R = mu_H = 0 in the
    level conventions of :class:`EngineParams`.
    """
    mu = {"L": params.delta_mu, "R": 0.0, "H": 0.0}
    temp = {"L": params.temp_w, "R": params.temp_w, "H": params.temp_h}
    level = {"L": params.eps_w, "R": params.eps_w, "H": params.eps_h}
    w_plus, w_minus = {}, {}
    for alpha in RESERVOIRS:
        for n in (0, 1):
            g = coupling(params, alpha, n)
            f = fermi(level[alpha] + params.coulomb_u * n, mu[alpha], temp[alpha])
            w_plus[(alpha, n)] = g * f
            w_minus[(alpha, n)] = g * (1.0 - f)
    return TransitionRates(w_plus=w_plus, w_minus=w_minus)


def generator(tr: TransitionRates) -> np.ndarray:
    """4x4 rate matrix over (00, 01, 10, 11); every column sums to zero.

    Entry [i, j] is the rate of the jump j -> i; transitions flipping both
    dots at once do not exist.
    """
    whp = lambda n: tr.w_plus[("H", n)]
    whm = lambda n: tr.w_minus[("H", n)]
    m = np.zeros((4, 4))
    m[1, 0] = whp(0)                 # 00 -> 01
    m[2, 0] = tr.w_work_plus(0)      # 00 -> 10
    m[0, 1] = whm(0)                 # 01 -> 00
    m[3, 1] = tr.w_work_plus(1)      # 01 -> 11
    m[0, 2] = tr.w_work_minus(0)     # 10 -> 00
    m[3, 2] = whp(1)                 # 10 -> 11
    m[1, 3] = tr.w_work_minus(1)     # 11 -> 01
    m[2, 3] = whm(1)                 # 11 -> 10
    np.fill_diagonal(m, -m.sum(axis=0))
    return m


def build_generator(params: EngineParams) -> np.ndarray:
    return generator(rates(params))

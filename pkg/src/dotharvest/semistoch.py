"""Backaction-free telegraph-piston model: the hot-dot occupation switches
stochastically and drives a deterministic relaxation of the work-dot
occupation, yielding four-stroke cycles with stochastic amplitude."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .model import EngineParams, rates
from .trajectory import rng_from_seed


class BackactionWarning(UserWarning):
    """Interaction not small against the hot temperature; the telegraph
    approximation degrades as U/T_H grows."""


@dataclass(frozen=True)
class TelegraphTrace:
    """Alternating switch times of the hot-dot occupation."""

    switch_times: np.ndarray
    initial_n_h: int
    duration: float
    seed: object

    def occupation_at(self, t: float) -> int:
        k = int(np.searchsorted(self.switch_times, t, side="right"))
        return (self.initial_n_h + k) % 2


def telegraph_rates(params: EngineParams) -> tuple[float, float]:
    """Switching rates (0 -> 1, 1 -> 0) of the hot-dot telegraph; the empty
    work dot's golden-rule rates, which the backaction-free limit makes
    occupation independent."""
    tr = rates(params)
    return tr.w_plus[("H", 0)], tr.w_minus[("H", 0)]


def telegraph_trace(params: EngineParams, duration: float, seed,
                    initial_n_h: int = 0) -> TelegraphTrace:
    """Sample the two-state hot-dot process over [0, duration]."""
    if duration <= 0:
        raise ValueError("duration must be positive")
    if params.coulomb_u / params.temp_h > 0.2:
        warnings.warn("U/T_H = %.2f: backaction-free treatment is unreliable"
                      % (params.coulomb_u / params.temp_h), BackactionWarning)
    w_up, w_down = telegraph_rates(params)
    rng = rng_from_seed(seed)
    t = 0.0
    n_h = int(initial_n_h)
    switches = []
    while True:
        t += rng.exponential(1.0 / (w_up if n_h == 0 else w_down))
        if t >= duration:
            break
        switches.append(t)
        n_h ^= 1
    return TelegraphTrace(switch_times=np.array(switches), initial_n_h=int(initial_n_h),
                          duration=float(duration), seed=seed)


@dataclass(frozen=True)
class WorkDotResponse:
    """Piecewise-exponential work-dot occupation driven by a telegraph trace.

    Between switches N_w relaxes toward the fixed point of the current
    hot-dot branch; the curve is continuous at every switch.
    """

    trace: TelegraphTrace
    fixed_points: tuple[float, float]     # target occupation for n_h = 0, 1
    relax_rates: tuple[float, float]      # total work-dot rate for n_h = 0, 1
    switch_values: np.ndarray             # N_w at each switch time
    initial_value: float

    def value(self, t) -> np.ndarray | float:
        scalar = np.isscalar(t)
        ts = np.atleast_1d(np.asarray(t, dtype=float))
        sw = self.trace.switch_times
        if len(sw) == 0:
            fp = self.fixed_points[self.trace.initial_n_h]
            g = self.relax_rates[self.trace.initial_n_h]
            out = fp + (self.initial_value - fp) * np.exp(-g * ts)
            return float(out[0]) if scalar else out
        idx = np.searchsorted(sw, ts, side="right")
        seg_start = np.where(idx > 0, sw[np.maximum(idx - 1, 0)], 0.0)
        n_start = np.where(idx > 0, self.switch_values[np.maximum(idx - 1, 0)],
                           self.initial_value)
        branch = (self.trace.initial_n_h + idx) % 2
        fp = np.choose(branch, self.fixed_points)
        g = np.choose(branch, self.relax_rates)
        out = fp + (n_start - fp) * np.exp(-g * (ts - seg_start))
        return float(out[0]) if scalar else out


def work_dot_response(params: EngineParams, trace: TelegraphTrace,
                      initial_value: float | None = None) -> WorkDotResponse:
    """Integrate the work-dot occupation along one telegraph realization.

    The default initial value is the empty-branch fixed point, which removes
    the start-up transient from cycle statistics.
    """
    tr = rates(params)
    fp = (tr.w_work_plus(0) / tr.gamma_work(0), tr.w_work_plus(1) / tr.gamma_work(1))
    gw = (tr.gamma_work(0), tr.gamma_work(1))
    n0 = fp[trace.initial_n_h] if initial_value is None else float(initial_value)
    if not 0.0 <= n0 <= 1.0:
        raise ValueError("initial work-dot occupation must lie in [0, 1]")
    vals = np.empty(len(trace.switch_times))
    cur, t_prev, branch = n0, 0.0, trace.initial_n_h
    for i, t in enumerate(trace.switch_times):
        cur = fp[branch] + (cur - fp[branch]) * np.exp(-gw[branch] * (t - t_prev))
        vals[i] = cur
        t_prev = t
        branch ^= 1
    return WorkDotResponse(trace=trace, fixed_points=fp, relax_rates=gw,
                           switch_values=vals, initial_value=n0)


@dataclass(frozen=True)
class SemiCycle:
    t_empty_start: float
    t_up: float
    t_down: float
    amplitude: float
    q_in: float
    w_out: float


def semi_cycles(trace: TelegraphTrace, response: WorkDotResponse,
                params: EngineParams) -> list[SemiCycle]:
    """Per-cycle heat intake and extracted work along one realization.

    A cycle spans one full empty stroke followed by one occupied stroke
    (previous 1->0 switch, then 0->1 at t_up, then 1->0 at t_down); the
    amplitude is the occupation drop between the two hot-dot jumps and the
    heat intake is U times it.  The leading partial cycle, which starts at
    t = 0 rather than at a 1->0 switch, is discarded.
    """
    if trace.initial_n_h != 0:
        raise ValueError("cycle bookkeeping assumes the trace starts with the hot dot empty")
    if len(trace.switch_times) < 3:
        return []
    tr = rates(params)
    u, dmu = params.coulomb_u, params.delta_mu
    # the closed-form work integral needs an energy-independent left coupling
    if abs(tr.gamma("L", 0) - tr.gamma("L", 1)) > 1e-12 * params.gamma_base:
        raise ValueError("per-cycle work assumes gamma_L independent of the hot dot")
    gl = tr.gamma("L", 0)
    fp, gw = response.fixed_points, response.relax_rates
    wlp = (tr.w_plus[("L", 0)], tr.w_plus[("L", 1)])
    wwp = (tr.w_work_plus(0), tr.w_work_plus(1))
    sw, vals = trace.switch_times, response.switch_values
    out = []
    for k in range(2, len(sw) - 1, 2):
        t0, t1, t2 = sw[k - 1], sw[k], sw[k + 1]
        n0, n1, n2 = vals[k - 1], vals[k], vals[k + 1]
        amp = n1 - n2
        w = dmu * ((gl / gw[0]) * (n0 - n1) + (t1 - t0) * ((gl / gw[0]) * wwp[0] - wlp[0])
                   + (gl / gw[1]) * (n1 - n2) + (t2 - t1) * ((gl / gw[1]) * wwp[1] - wlp[1]))
        out.append(SemiCycle(t_empty_start=float(t0), t_up=float(t1), t_down=float(t2),
                             amplitude=float(amp), q_in=float(u * amp), w_out=float(w)))
    return out


def max_qin(params: EngineParams) -> float:
    """Largest heat intake a single cycle can achieve: U times the spread of
    the two fixed points."""
    tr = rates(params)
    return params.coulomb_u * (tr.w_work_plus(0) / tr.gamma_work(0)
                               - tr.w_work_plus(1) / tr.gamma_work(1))


@dataclass(frozen=True)
class SemiEnsemble:
    t_grid: np.ndarray
    mean_occupation: np.ndarray
    se_occupation: np.ndarray
    q_in: np.ndarray
    w_out: np.ndarray
    work_rates: np.ndarray      # per-trace extracted work per unit time


def semi_ensemble(params: EngineParams, n_traj: int, duration: float,
                  base_seed: int, t_grid=None) -> SemiEnsemble:
    """Ensemble of telegraph realizations: occupation average on a time grid
    plus pooled per-cycle heat and work samples."""
    if t_grid is None:
        t_grid = np.linspace(0.0, min(50.0, duration), 101)
    t_grid = np.asarray(t_grid, dtype=float)
    acc = np.zeros_like(t_grid)
    acc2 = np.zeros_like(t_grid)
    qins, wouts, wrates = [], [], []
    for k in range(n_traj):
        trace = telegraph_trace(params, duration, (int(base_seed), k))
        resp = work_dot_response(params, trace)
        nw = resp.value(t_grid)
        acc += nw
        acc2 += nw * nw
        cyc = semi_cycles(trace, resp, params)
        qins.extend(c.q_in for c in cyc)
        wouts.extend(c.w_out for c in cyc)
        wrates.append(sum(c.w_out for c in cyc) / duration)
    mean = acc / n_traj
    var = np.maximum(acc2 / n_traj - mean ** 2, 0.0)
    return SemiEnsemble(t_grid=t_grid, mean_occupation=mean,
                        se_occupation=np.sqrt(var / n_traj),
                        q_in=np.array(qins), w_out=np.array(wouts),
                        work_rates=np.array(wrates))

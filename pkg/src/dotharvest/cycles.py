"""Classification of 00-anchored trajectory segments into the cycle taxonomy,
cycle statistics, fluctuation-theorem checks, the analytic duration density of
the work-extracting cycle, and closed-form cycle rates from the diagram
(spanning-subgraph) method."""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm
from scipy.optimize import bisect, curve_fit, minimize_scalar

from .model import EngineParams, carnot, rates
from .trajectory import (INVERSE_CODE, LABEL_CODE, LABELS, Segment,
                         segment_at_00, stochastic_intensity)

# ---------------------------------------------------------------------------
# classification

#: canonical jump sequences of the six forward cycles and their reverses,
#: as label-code tuples anchored at state 00
_SEQ = lambda *labs: tuple(LABEL_CODE[l] for l in labs)
CANONICAL = {
    _SEQ("L+", "H+", "R-", "H-"): "C1",
    _SEQ("R+", "H+", "R-", "H-"): "C2",
    _SEQ("L+", "H+", "L-", "H-"): "C3",
    _SEQ("R+", "H+", "L-", "H-"): "C4",
    _SEQ("H+", "L+", "R-", "H-"): "C5",
    _SEQ("L+", "R-"): "C6",
    _SEQ("H+", "R+", "H-", "L-"): "C1R",
    _SEQ("H+", "R+", "H-", "R-"): "C2R",
    _SEQ("H+", "L+", "H-", "L-"): "C3R",
    _SEQ("H+", "L+", "H-", "R-"): "C4R",
    _SEQ("H+", "R+", "L-", "H-"): "C5R",
    _SEQ("R+", "L-"): "C6R",
}

FORWARD_CLASSES = ("C1", "C2", "C3", "C4", "C5", "C6")
REVERSE_CLASSES = tuple(c + "R" for c in FORWARD_CLASSES)
ALL_CLASSES = FORWARD_CLASSES + REVERSE_CLASSES + ("primed", "null", "other")

#: transported charge and hot heat of the canonical classes, in units of
#: (electrons into L, multiples of (eps_h-independent) U quanta handled below)
_TABLE_DN_L = {"C1": -1, "C2": 0, "C3": 0, "C4": 1, "C5": -1, "C6": -1}
_TABLE_QH_U = {"C1": 1, "C2": 1, "C3": 1, "C4": 1, "C5": 0, "C6": 0}


class SegmentError(ValueError):
    """Segment is not anchored at state 00 on both ends."""


@dataclass(frozen=True)
class CycleRecord:
    cls: str
    duration: float
    dn_l: int           # electrons delivered into reservoir L
    q_h: float          # heat drawn from reservoir H
    dsigma: float       # entropy produced over the segment
    n_jumps: int
    start_time: float


def reduce_labels(labels) -> tuple:
    """Iteratively cancel adjacent mutually-inverse same-reservoir jump pairs.

    Leftover sequence is still a valid 00-anchored closed path; the removed
    pairs are the spurious sub-cycles, which carry no transport.
    """
    seq = [int(c) for c in labels]
    changed = True
    while changed:
        changed = False
        out = []
        i = 0
        while i < len(seq):
            if i + 1 < len(seq) and seq[i + 1] == INVERSE_CODE[seq[i]]:
                i += 2
                changed = True
            else:
                out.append(seq[i])
                i += 1
        seq = out
    return tuple(seq)


def classify_segment(segment: Segment, params: EngineParams) -> CycleRecord:
    """Classify one closed 00 -> 00 segment and tally its thermodynamics.

    Transported charge, heat and entropy are computed from the *raw* jump
    sequence (each hot-reservoir jump carries +-(eps_h + U n_w) at the
    work-dot occupation of the jump instant); only the classification itself
    runs on the sub-cycle-cancelled sequence.
    """
    if segment.start_state != 0 or segment.end_state != 0:
        raise SegmentError("segment must start and end in state 00")
    labels = segment.labels
    n_w = 0
    dn_l = 0
    q_h = 0.0
    u, eps_h = params.coulomb_u, params.eps_h
    for code in labels:
        lab = LABELS[code]
        if lab == "L+":
            dn_l -= 1
            n_w = 1
        elif lab == "L-":
            dn_l += 1
            n_w = 0
        elif lab == "R+":
            n_w = 1
        elif lab == "R-":
            n_w = 0
        elif lab == "H+":
            q_h += eps_h + u * n_w
        else:
            q_h -= eps_h + u * n_w
    dsigma = (params.beta_w - params.beta_h) * q_h - params.beta_w * params.delta_mu * dn_l

    reduced = reduce_labels(labels)
    if len(reduced) == 0:
        cls = "null"
    elif reduced in CANONICAL:
        cls = CANONICAL[reduced]
    else:
        n_up = sum(1 for c in reduced if c == LABEL_CODE["H+"])
        n_dn = sum(1 for c in reduced if c == LABEL_CODE["H-"])
        cls = "primed" if (n_up, n_dn) == (1, 1) else "other"
    return CycleRecord(cls=cls, duration=segment.duration, dn_l=dn_l, q_h=q_h,
                       dsigma=dsigma, n_jumps=len(labels), start_time=segment.start_time)


def table_entropy(params: EngineParams, cls: str) -> float:
    """Entropy production of a canonical class from its transport content.

    eps_h enters the two hot jumps of a closed cycle with opposite signs and
    cancels, leaving integer multiples of U as the only heat quanta.
    """
    base = cls[:2]
    sign = -1.0 if cls.endswith("R") else 1.0
    q_h = _TABLE_QH_U[base] * params.coulomb_u
    dn = _TABLE_DN_L[base]
    return sign * ((params.beta_w - params.beta_h) * q_h
                   - params.beta_w * params.delta_mu * dn)


# ---------------------------------------------------------------------------
# ensemble statistics

@dataclass
class CycleStats:
    """Additive cycle statistics over a trajectory ensemble."""

    params: EngineParams
    n_traj: int = 0
    total_duration: float = 0.0
    counts: dict = field(default_factory=lambda: defaultdict(int))
    durations: dict = field(default_factory=lambda: defaultdict(list))
    sum_dn_l: dict = field(default_factory=lambda: defaultdict(int))
    sum_q_h: dict = field(default_factory=lambda: defaultdict(float))
    sum_dsigma: dict = field(default_factory=lambda: defaultdict(float))
    per_trajectory: list = field(default_factory=list)
    per_traj_dn_l: list = field(default_factory=list)      # incl. remainders
    per_traj_dsigma: list = field(default_factory=list)    # incl. remainders
    c4_no_subcycle_durations: list = field(default_factory=list)
    c4_start_gaps: list = field(default_factory=list)
    remainder_dn_l: int = 0
    remainder_dsigma: float = 0.0
    remainder_duration: float = 0.0
    intensities: list = field(default_factory=list)

    def rate(self, cls: str) -> float:
        return self.counts[cls] / self.total_duration

    def per_traj_rates(self, cls: str) -> np.ndarray:
        t = self.total_duration / self.n_traj
        return np.array([pt.get(cls, 0) for pt in self.per_trajectory]) / t

    @property
    def n_segments(self) -> int:
        return sum(self.counts.values())

    def power_cycles(self) -> float:
        """Power reconstructed from the per-class charge tallies alone."""
        dn = sum(self.sum_dn_l.values())
        return self.params.delta_mu * dn / self.total_duration

    def power_remainder(self) -> float:
        return self.params.delta_mu * self.remainder_dn_l / self.total_duration

    def entropy_rate_cycles(self) -> float:
        return sum(self.sum_dsigma.values()) / self.total_duration

    def entropy_rate_remainder(self) -> float:
        return self.remainder_dsigma / self.total_duration


def _remainder_tallies(seg: Segment, params: EngineParams, start_state: int):
    """Charge and environment-entropy tallies of an open (non-cyclic) piece."""
    n_w = 1 if start_state in (2, 3) else 0
    dn_l = 0
    q_h = 0.0
    for code in seg.labels:
        lab = LABELS[code]
        if lab == "L+":
            dn_l -= 1
            n_w = 1
        elif lab == "L-":
            dn_l += 1
            n_w = 0
        elif lab == "R+":
            n_w = 1
        elif lab == "R-":
            n_w = 0
        elif lab == "H+":
            q_h += params.eps_h + params.coulomb_u * n_w
        else:
            q_h -= params.eps_h + params.coulomb_u * n_w
    dsig = (params.beta_w - params.beta_h) * q_h - params.beta_w * params.delta_mu * dn_l
    return dn_l, dsig


def cycle_stats(trajectories, params: EngineParams) -> CycleStats:
    """Classify every 00-anchored segment of an ensemble and accumulate
    counts, rates, durations, transport tallies and the open remainders."""
    trajectories = list(trajectories)
    if not trajectories:
        raise ValueError("empty ensemble")
    stats = CycleStats(params=params)
    for traj in trajectories:
        segments, head, tail = segment_at_00(traj)
        tc: dict = defaultdict(int)
        c4_starts = []
        traj_dn, traj_ds = 0, 0.0
        for seg in segments:
            rec = classify_segment(seg, params)
            stats.counts[rec.cls] += 1
            tc[rec.cls] += 1
            stats.durations[rec.cls].append(rec.duration)
            stats.sum_dn_l[rec.cls] += rec.dn_l
            stats.sum_q_h[rec.cls] += rec.q_h
            stats.sum_dsigma[rec.cls] += rec.dsigma
            traj_dn += rec.dn_l
            traj_ds += rec.dsigma
            if rec.cls == "C4":
                c4_starts.append(rec.start_time)
                if rec.n_jumps == 4:
                    stats.c4_no_subcycle_durations.append(rec.duration)
        for rem, s0 in ((head, traj.initial_state), (tail, 0)):
            if rem is not None and len(rem.labels):
                dn, ds = _remainder_tallies(rem, params, rem.start_state)
                stats.remainder_dn_l += dn
                stats.remainder_dsigma += ds
                stats.remainder_duration += rem.duration
                traj_dn += dn
                traj_ds += ds
        if len(c4_starts) >= 2:
            stats.c4_start_gaps.extend(np.diff(c4_starts))
        stats.per_trajectory.append(dict(tc))
        stats.per_traj_dn_l.append(traj_dn)
        stats.per_traj_dsigma.append(traj_ds)
        stats.intensities.append(stochastic_intensity(traj))
        stats.n_traj += 1
        stats.total_duration += traj.duration
    return stats


# ---------------------------------------------------------------------------
# fluctuation theorems

@dataclass(frozen=True)
class DftRow:
    cls: str
    log_ratio: float | None
    dsigma: float
    std_error: float | None
    n_forward: int
    n_reverse: int
    sufficient: bool


def dft_check(stats: CycleStats, min_counts: int = 1) -> list[DftRow]:
    """ln(r_C / r_Crev) against the per-cycle entropy production, class by
    class; classes without counts in both directions are flagged and carry no
    ratio."""
    rows = []
    for cls in FORWARD_CLASSES:
        nf, nr = stats.counts[cls], stats.counts[cls + "R"]
        ds = table_entropy(stats.params, cls)
        if min(nf, nr) >= max(min_counts, 1):
            lr = math.log(nf / nr)
            se = math.sqrt(1.0 / nf + 1.0 / nr)
            rows.append(DftRow(cls, lr, ds, se, nf, nr, True))
        else:
            rows.append(DftRow(cls, None, ds, None, nf, nr, False))
    return rows


def ift_check(stats: CycleStats) -> tuple[float, float]:
    """Cycle-ensemble average of exp(-dsigma) over the matched forward and
    reverse classes, with a trajectory-resampling standard error; the exact
    value is 1."""
    classes = FORWARD_CLASSES + REVERSE_CLASSES
    if not any(stats.counts[c] for c in classes):
        raise ValueError("no classified cycles in the ensemble")
    ds = {c: table_entropy(stats.params, c) for c in classes}
    num = np.array([sum(pt.get(c, 0) * math.exp(-ds[c]) for c in classes)
                    for pt in stats.per_trajectory])
    den = np.array([float(sum(pt.get(c, 0) for c in classes))
                    for pt in stats.per_trajectory])
    value = num.sum() / den.sum()
    mn, md = num.mean(), den.mean()
    cov = np.cov(num, den)
    var = value ** 2 * (cov[0, 0] / mn ** 2 + cov[1, 1] / md ** 2
                        - 2.0 * cov[0, 1] / (mn * md)) / len(num)
    return float(value), float(np.sqrt(max(var, 0.0)))


def hill_ift(params: EngineParams) -> float:
    """The same average evaluated with the closed-form cycle rates; equals 1
    identically because each reverse rate is e^{-dsigma} times the forward."""
    hr = hill_cycle_rates(params)
    pairs = {
        "C1": hr.pi_c1 * hr.sigma_c1,
        "C4": hr.pi_c4 * hr.sigma_c4,
        "C6": hr.pi_c6 * hr.sigma_c6,
    }
    dsig = {c: table_entropy(params, c) for c in pairs}
    num = sum(r * math.exp(-dsig[c]) + r * math.exp(-dsig[c]) * math.exp(dsig[c])
              for c, r in pairs.items())
    den = sum(r + r * math.exp(-dsig[c]) for c, r in pairs.items())
    return num / den


# ---------------------------------------------------------------------------
# duration density of the work-extracting cycle

def _c4_stage_rates(params: EngineParams) -> np.ndarray:
    """Total exit rates of the four states visited along 00->10->11->01->00."""
    tr = rates(params)
    return np.array([
        tr.w_plus[("H", 0)] + tr.w_work_plus(0),
        tr.w_plus[("H", 1)] + tr.w_work_minus(0),
        tr.w_minus[("H", 1)] + tr.w_work_minus(1),
        tr.w_minus[("H", 0)] + tr.w_work_plus(1),
    ])


def c4_duration_analytic(params: EngineParams, tau) -> np.ndarray | float:
    """Normalized duration density of the bare four-jump work cycle.

    The waiting times of the four legs are independent exponentials with the
    visited states' total exit rates, so the normalized density is the
    phase-type (hypoexponential) law of their sum, evaluated here through the
    matrix exponential of the bidiagonal stage generator for numerical
    robustness near coinciding rates.
    """
    s = _c4_stage_rates(params)
    gen = np.diag(-s) + np.diag(s[:3], k=1)
    alpha = np.array([1.0, 0.0, 0.0, 0.0])
    exit_vec = np.array([0.0, 0.0, 0.0, s[3]])
    scalar = np.isscalar(tau)
    taus = np.atleast_1d(np.asarray(tau, dtype=float))
    if np.any(taus < 0):
        raise ValueError("tau must be non-negative")
    vals = np.array([alpha @ expm(gen * t) @ exit_vec for t in taus])
    return float(vals[0]) if scalar else vals


def c4_duration_cdf(params: EngineParams, tau) -> np.ndarray | float:
    s = _c4_stage_rates(params)
    gen = np.diag(-s) + np.diag(s[:3], k=1)
    alpha = np.array([1.0, 0.0, 0.0, 0.0])
    scalar = np.isscalar(tau)
    taus = np.atleast_1d(np.asarray(tau, dtype=float))
    vals = np.array([1.0 - alpha @ expm(gen * t) @ np.ones(4) for t in taus])
    return float(vals[0]) if scalar else vals


def c4_duration_mean(params: EngineParams) -> float:
    return float(np.sum(1.0 / _c4_stage_rates(params)))


def c4_duration_mode(params: EngineParams) -> float:
    mean = c4_duration_mean(params)
    res = minimize_scalar(lambda t: -c4_duration_analytic(params, t),
                          bounds=(0.0, 3.0 * mean), method="bounded",
                          options=dict(xatol=1e-6))
    return float(res.x)


# ---------------------------------------------------------------------------
# gaps between successive work cycles

@dataclass(frozen=True)
class GapFit:
    bin_left: np.ndarray
    density: np.ndarray
    half_life: float
    decay_rate: float
    n_gaps: int


def intercycle_gap_stats(stats: CycleStats, bin_width: float = 4.0,
                         t_max: float = 300.0) -> GapFit:
    """Histogram of start-to-start gaps between successive work cycles with a
    least-squares exponential fit restricted to gaps longer than the mean
    cycle duration."""
    gaps = np.asarray(stats.c4_start_gaps, dtype=float)
    if len(gaps) < 2:
        raise ValueError("not enough work-cycle occurrences for gap statistics")
    mean_dur = float(np.mean(stats.durations["C4"]))
    hist, edges = np.histogram(gaps, bins=np.arange(0.0, t_max, bin_width), density=True)
    mid = 0.5 * (edges[1:] + edges[:-1])
    mask = (mid > mean_dur) & (hist > 0)
    if mask.sum() < 3:
        raise ValueError("too few populated bins beyond the mean duration")
    popt, _ = curve_fit(lambda t, a, k: a * np.exp(-k * t), mid[mask], hist[mask],
                        p0=[hist[mask][0], 0.02])
    rate = float(popt[1])
    return GapFit(bin_left=edges[:-1], density=hist, half_life=math.log(2.0) / rate,
                  decay_rate=rate, n_gaps=len(gaps))


# ---------------------------------------------------------------------------
# closed-form cycle rates (diagram method) and stall-bias estimates

@dataclass(frozen=True)
class HillRates:
    pi_c1: float
    pi_c4: float
    pi_c6: float
    pi_cstar: float
    sigma_c1: float
    sigma_c4: float
    sigma_c6: float
    sigma_cstar: float
    ratio_c4_c6: float
    extended_ratio: float


def hill_cycle_rates(params: EngineParams) -> HillRates:
    """Spanning-subgraph rate products for the transport-carrying cycles.

    Cycles through all four states carry sigma = 1; the two-state cycles
    carry the sum over converging subgraphs on the remaining states.  The
    normalizing sum over all subgraphs cancels in every ratio and is not
    evaluated.
    """
    tr = rates(params)
    wp, wm = tr.w_plus, tr.w_minus
    pi_c1 = wp[("L", 0)] * wp[("H", 1)] * wm[("R", 1)] * wm[("H", 0)]
    pi_c4 = wp[("R", 0)] * wp[("H", 1)] * wm[("L", 1)] * wm[("H", 0)]
    pi_c6 = wp[("L", 0)] * wm[("R", 0)]
    pi_cstar = wp[("L", 1)] * wm[("R", 1)]
    sigma_c6 = (wm[("H", 0)] * wm[("H", 1)]
                + tr.w_work_minus(1) * wm[("H", 0)]
                + tr.w_work_plus(1) * wm[("H", 1)])
    sigma_cstar = (wp[("H", 0)] * wp[("H", 1)]
                   + tr.w_work_minus(0) * wp[("H", 0)]
                   + tr.w_work_plus(0) * wp[("H", 1)])
    ratio = pi_c4 / (pi_c6 * sigma_c6)
    extended = pi_c4 / (pi_c1 + pi_c6 * sigma_c6 + pi_cstar * sigma_cstar)
    return HillRates(pi_c1=pi_c1, pi_c4=pi_c4, pi_c6=pi_c6, pi_cstar=pi_cstar,
                     sigma_c1=1.0, sigma_c4=1.0, sigma_c6=sigma_c6,
                     sigma_cstar=sigma_cstar, ratio_c4_c6=ratio,
                     extended_ratio=extended)


STALL_MODES = ("necessary", "two_cycle", "extended")


class NoStallEstimateError(RuntimeError):
    """The cycle-balance equation has no root on the engine window."""


def stall_bias_cycle_estimate(params: EngineParams, mode: str = "two_cycle",
                              tol: float = 1e-3) -> float:
    """Stall-bias estimates from cycle bookkeeping.

    ``necessary``: the bias at which the work cycle's entropy production
    changes sign, U * carnot.  ``two_cycle``: balance of the work cycle
    against the two-state leakage cycle.  ``extended``: additionally charges
    the four-state leakage cycle and the leakage sub-cycle at occupied hot
    dot against the work cycle.
    """
    if mode not in STALL_MODES:
        raise ValueError(f"unknown stall estimate mode {mode!r}")
    eta_c = carnot(params)
    if eta_c <= 0:
        raise NoStallEstimateError("needs temp_h > temp_w")
    u = params.coulomb_u
    if mode == "necessary":
        return u * eta_c

    def balance(dmu: float) -> float:
        p = params.replace(delta_mu=dmu)
        hr = hill_cycle_rates(p)
        ds6 = p.beta_w * dmu
        ds4 = (p.beta_w - p.beta_h) * u - p.beta_w * dmu
        rhs = -math.expm1(-ds6) / -math.expm1(-ds4)
        lhs = hr.ratio_c4_c6 if mode == "two_cycle" else hr.extended_ratio
        return lhs - rhs

    lo, hi = 1e-9, u * eta_c - 1e-9
    if balance(lo) <= 0 or balance(hi) >= 0:
        raise NoStallEstimateError("no root of the cycle balance on (0, U*carnot)")
    return bisect(balance, lo, hi, xtol=tol)

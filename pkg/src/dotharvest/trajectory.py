"""Exact continuous-time kinetic Monte Carlo unraveling of the 4-state chain.

Each trajectory owns an independent random stream derived from its seed, so
ensembles are reproducible regardless of execution order.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, NamedTuple

import numpy as np

from .model import EngineParams, STATE_OCCS, rates

#: Jump labels; codes index this tuple.
LABELS = ("L+", "L-", "R+", "R-", "H+", "H-")
LABEL_CODE = {lab: i for i, lab in enumerate(LABELS)}

#: code of the inverse jump (same reservoir, opposite direction)
INVERSE_CODE = (1, 0, 3, 2, 5, 4)


class JumpEvent(NamedTuple):
    time: float
    label: str


@dataclass(frozen=True)
class Trajectory:
    """Time-ordered jump record of one stochastic realization.

    ``labels`` holds codes into :data:`LABELS`; ``states`` the state index
    (00, 01, 10, 11) reached by each jump.
    """

    initial_state: int
    times: np.ndarray
    labels: np.ndarray
    states: np.ndarray
    duration: float
    seed: object

    @property
    def events(self) -> list[JumpEvent]:
        return [JumpEvent(float(t), LABELS[c]) for t, c in zip(self.times, self.labels)]

    def __len__(self) -> int:
        return len(self.times)


@dataclass(frozen=True)
class Segment:
    """A stretch of consecutive jumps, open or closed at state 00."""

    start_time: float
    end_time: float
    labels: np.ndarray          # label codes
    start_state: int
    end_state: int

    @property
    def duration(self) -> float:
        return self.end_time - self.start_time


def _channel_table(params: EngineParams):
    """Per-state jump channels as (codes, targets, cum_probs, total_rate)."""
    tr = rates(params)
    table = []
    for s, (nw, nh) in enumerate(STATE_OCCS):
        chans = []
        if nw == 0:
            chans.append((LABEL_CODE["L+"], s + 2, tr.w_plus[("L", nh)]))
            chans.append((LABEL_CODE["R+"], s + 2, tr.w_plus[("R", nh)]))
        else:
            chans.append((LABEL_CODE["L-"], s - 2, tr.w_minus[("L", nh)]))
            chans.append((LABEL_CODE["R-"], s - 2, tr.w_minus[("R", nh)]))
        if nh == 0:
            chans.append((LABEL_CODE["H+"], s + 1, tr.w_plus[("H", nw)]))
        else:
            chans.append((LABEL_CODE["H-"], s - 1, tr.w_minus[("H", nw)]))
        codes = np.array([c[0] for c in chans], dtype=np.int8)
        targets = np.array([c[1] for c in chans], dtype=np.int8)
        r = np.array([c[2] for c in chans], dtype=float)
        total = r.sum()
        table.append((codes, targets, np.cumsum(r) / total, total))
    return table


def rng_from_seed(seed) -> np.random.Generator:
    """Generator on an independent stream; ``seed`` may be an int or a tuple
    such as (base_seed, trajectory_index)."""
    return np.random.default_rng(np.random.SeedSequence(entropy=seed))


def simulate(params: EngineParams, duration: float, seed, initial_state: int = 0) -> Trajectory:
    """Exact Gillespie sampling of the jump process up to ``duration``.

    At every state the waiting time is exponential with the total exit rate
    and the jump channel is drawn in proportion to its rate; the first event
    past ``duration`` is discarded.  Identical seeds give identical event
    sequences.
    """
    if duration <= 0:
        raise ValueError("duration must be positive")
    rng = rng_from_seed(seed)
    table = _channel_table(params)
    t = 0.0
    s = int(initial_state)
    times, labels, states = [], [], []
    exponential, uniform = rng.exponential, rng.random
    while True:
        codes, targets, cum, total = table[s]
        t += exponential(1.0 / total)
        if t > duration:
            break
        i = np.searchsorted(cum, uniform(), side="right")
        times.append(t)
        labels.append(codes[i])
        s = int(targets[i])
        states.append(s)
    return Trajectory(initial_state=int(initial_state),
                      times=np.array(times, dtype=float),
                      labels=np.array(labels, dtype=np.int8),
                      states=np.array(states, dtype=np.int8),
                      duration=float(duration), seed=seed)


def simulate_ensemble(params: EngineParams, n_traj: int, duration: float,
                      base_seed: int, initial_state: int = 0) -> list[Trajectory]:
    """Independent trajectories seeded by splitting (base_seed, index)."""
    return [simulate(params, duration, (int(base_seed), k), initial_state)
            for k in range(n_traj)]


def stochastic_intensity(traj: Trajectory) -> float:
    """Net electrons delivered to reservoir L per unit time along the
    trajectory: (#L- - #L+) / duration."""
    n_out = int(np.sum(traj.labels == LABEL_CODE["L-"]))
    n_in = int(np.sum(traj.labels == LABEL_CODE["L+"]))
    return (n_out - n_in) / traj.duration


def segment_at_00(traj: Trajectory) -> tuple[list[Segment], Segment | None, Segment | None]:
    """Split the jump record at every visit to state 00.

    Returns (closed_segments, head, tail): the head is the piece before the
    first 00 visit (None when the trajectory starts at 00), the tail the
    piece after the last visit (None when empty).  A trajectory that never
    touches 00 comes back entirely as the tail remainder.
    """
    anchors = np.flatnonzero(traj.states == 0)
    segments: list[Segment] = []
    head = None

    if traj.initial_state != 0:
        if len(anchors) == 0:
            tail = Segment(0.0, traj.duration, traj.labels.copy(),
                           traj.initial_state, int(traj.states[-1]) if len(traj) else traj.initial_state)
            return [], None, tail
        k0 = anchors[0]
        head = Segment(0.0, float(traj.times[k0]), traj.labels[:k0 + 1].copy(),
                       traj.initial_state, 0)
        start = k0 + 1
        t_start = float(traj.times[k0])
    else:
        start = 0
        t_start = 0.0

    for k in anchors[anchors >= start] if traj.initial_state != 0 else anchors:
        segments.append(Segment(t_start, float(traj.times[k]),
                                traj.labels[start:k + 1].copy(), 0, 0))
        start = k + 1
        t_start = float(traj.times[k])

    tail = None
    if start < len(traj):
        tail = Segment(t_start, traj.duration, traj.labels[start:].copy(),
                       0, int(traj.states[-1]))
    return segments, head, tail


def residence_fractions(traj: Trajectory, burn_in: float = 0.0) -> np.ndarray:
    """Fraction of time spent in each state, optionally discarding an initial
    burn-in window."""
    frac = np.zeros(4)
    t_prev = 0.0
    s = traj.initial_state
    for t, s_next in zip(traj.times, traj.states):
        a, b = max(t_prev, burn_in), max(float(t), burn_in)
        frac[s] += b - a
        t_prev = float(t)
        s = int(s_next)
    frac[s] += max(traj.duration, burn_in) - max(t_prev, burn_in)
    return frac / (traj.duration - burn_in)


def label_count_rate(trajectories: Iterable[Trajectory], label: str) -> float:
    """Ensemble-averaged occurrences of one jump label per unit time."""
    code = LABEL_CODE[label]
    total, time = 0, 0.0
    for tr in trajectories:
        total += int(np.sum(tr.labels == code))
        time += tr.duration
    return total / time

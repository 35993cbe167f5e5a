import numpy as np
import pytest

from dotharvest import (EngineParams, evolve, max_qin, observables, semi_cycles,
                        telegraph_trace, work_dot_response)
from dotharvest.model import TransitionRates, build_generator, generator, rates
from dotharvest.semistoch import (BackactionWarning, semi_ensemble,
                                  telegraph_rates)


def test_telegraph_rates_backaction_free_regime(psemi):
    w_up, w_down = telegraph_rates(psemi)
    assert w_up == pytest.approx(0.5, abs=1e-12)     # eps_h = 0
    assert w_down == pytest.approx(0.5, abs=1e-12)


def test_telegraph_occupation_fraction(psemi):
    w_up, w_down = telegraph_rates(psemi)
    expected = w_up / (w_up + w_down)
    occupied = 0.0
    total = 0.0
    for k in range(50):
        trace = telegraph_trace(psemi, 2000.0, (9, k))
        edges = np.concatenate([[0.0], trace.switch_times, [trace.duration]])
        spans = np.diff(edges)
        occupied += spans[1::2].sum()
        total += trace.duration
    assert occupied / total == pytest.approx(expected, abs=0.01)


def test_telegraph_seeded_reproducibility(psemi):
    a = telegraph_trace(psemi, 500.0, seed=11)
    b = telegraph_trace(psemi, 500.0, seed=11)
    np.testing.assert_array_equal(a.switch_times, b.switch_times)


def test_telegraph_warns_outside_regime(pstar):
    with pytest.warns(BackactionWarning):
        telegraph_trace(pstar, 10.0, seed=0)     # U/T_H = 1/3


def test_response_relaxes_to_fixed_points(psemi):
    tr = rates(psemi)
    fp0 = tr.w_work_plus(0) / tr.gamma_work(0)
    trace = telegraph_trace(psemi, 5.0, seed=1)
    # constant branch: empty hot dot all the way
    frozen = trace.__class__(switch_times=np.array([]), initial_n_h=0,
                             duration=200.0, seed=None)
    resp = work_dot_response(psemi, frozen, initial_value=0.1)
    assert resp.value(200.0) == pytest.approx(fp0, abs=1e-10)


def test_response_stays_in_unit_interval_and_is_continuous(psemi):
    trace = telegraph_trace(psemi, 200.0, seed=2)
    resp = work_dot_response(psemi, trace)
    ts = np.linspace(0.0, 200.0, 4001)
    vals = resp.value(ts)
    assert np.all(vals >= 0.0) and np.all(vals <= 1.0)
    for t_sw, v_sw in zip(trace.switch_times[:20], resp.switch_values[:20]):
        assert resp.value(t_sw) == pytest.approx(v_sw, abs=1e-12)
        assert resp.value(t_sw - 1e-9) == pytest.approx(v_sw, abs=1e-6)


def test_semi_cycles_bookkeeping(psemi):
    trace = telegraph_trace(psemi, 500.0, seed=3)
    resp = work_dot_response(psemi, trace)
    cycles = semi_cycles(trace, resp, psemi)
    assert len(cycles) > 10
    bound = max_qin(psemi)
    for c in cycles:
        assert c.t_empty_start < c.t_up < c.t_down
        assert c.q_in == pytest.approx(psemi.coulomb_u * c.amplitude, rel=1e-12)
        assert -1e-9 <= c.q_in <= bound + 1e-9


def test_short_occupied_stroke_has_small_amplitude(psemi):
    trace = telegraph_trace(psemi, 500.0, seed=4)
    resp = work_dot_response(psemi, trace)
    for c in semi_cycles(trace, resp, psemi):
        dt = c.t_down - c.t_up
        if dt < 1e-3:
            assert abs(c.amplitude) < 1e-2


def test_max_qin_reference_value(psemi):
    assert max_qin(psemi) == pytest.approx(1.1413, abs=2e-4)


def test_max_qin_degenerate_point():
    p = EngineParams(x=0.0, eps_w=0.0, coulomb_u=0.0, temp_h=100.0)
    assert max_qin(p) == pytest.approx(0.0, abs=1e-14)


def _backaction_free_power(params):
    """Master-equation power with the hot-dot rates made occupation blind,
    the exact ensemble counterpart of the telegraph model."""
    tr = rates(params)
    wp = dict(tr.w_plus)
    wm = dict(tr.w_minus)
    wp[("H", 1)] = wp[("H", 0)]
    wm[("H", 1)] = wm[("H", 0)]
    mod = TransitionRates(w_plus=wp, w_minus=wm)
    from dotharvest.master import steady_state
    rho = steady_state(generator(mod))
    current = (wm[("L", 0)] * rho[2] + wm[("L", 1)] * rho[3]
               - wp[("L", 0)] * rho[0] - wp[("L", 1)] * rho[1])
    return params.delta_mu * current


def test_work_rate_matches_backaction_free_ensemble(psemi):
    ens = semi_ensemble(psemi, 400, 2000.0, base_seed=5)
    se = ens.work_rates.std(ddof=1) / np.sqrt(len(ens.work_rates))
    assert abs(ens.work_rates.mean() - _backaction_free_power(psemi)) < 3.0 * se
    # against the full master equation the residual is the backaction
    # correction of order U/T_H, here below ten percent
    p_full = observables(psemi).power
    assert ens.work_rates.mean() == pytest.approx(p_full, rel=0.10)


def test_mean_occupation_tracks_master_equation(psemi):
    ens = semi_ensemble(psemi, 1000, 50.0, base_seed=5)
    tr = rates(psemi)
    fp0 = tr.w_work_plus(0) / tr.gamma_work(0)
    gen = build_generator(psemi)
    rho0 = np.array([1.0 - fp0, 0.0, fp0, 0.0])
    mask = ens.se_occupation > 1e-12
    worst = 0.0
    for t, m, se in zip(ens.t_grid[mask], ens.mean_occupation[mask],
                        ens.se_occupation[mask]):
        rho_t = evolve(gen, rho0, float(t))
        worst = max(worst, abs(m - (rho_t[2] + rho_t[3])) / se)
    assert worst < 3.0

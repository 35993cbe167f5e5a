import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dotharvest import (EngineParams, ParameterError, asymmetry, build_generator,
                        carnot, coupling, fermi, generator, rates)
from dotharvest.model import DegenerateCouplingError


def test_fermi_symmetry_point():
    assert fermi(0.0, 0.0, 5.0) == pytest.approx(0.5, abs=1e-15)


def test_fermi_saturation_no_overflow():
    # (eps - mu)/temp = 50 is deep in the tail but must stay finite
    v = fermi(250.0, 0.0, 5.0)
    assert 0.0 < v < 2e-22
    assert fermi(3500.0, 0.0, 5.0) >= 0.0          # |x| = 700
    assert fermi(-3500.0, 0.0, 5.0) <= 1.0


def test_fermi_matches_arbitrary_precision_oracle():
    import mpmath
    mpmath.mp.dps = 50
    for eps, mu, temp in [(5.0, 0.25, 5.0), (1.3, -0.7, 0.9), (-4.0, 2.0, 11.0)]:
        exact = float(1 / (mpmath.e ** ((mpmath.mpf(eps) - mu) / temp) + 1))
        assert fermi(eps, mu, temp) == pytest.approx(exact, rel=1e-14)


def test_fermi_rejects_bad_temperature():
    with pytest.raises(ParameterError):
        fermi(1.0, 0.0, 0.0)
    with pytest.raises(ParameterError):
        fermi(1.0, 0.0, -2.0)


def test_params_validation():
    with pytest.raises(ParameterError):
        EngineParams(temp_w=-1.0)
    with pytest.raises(ParameterError):
        EngineParams(x=1.5)
    with pytest.raises(ParameterError):
        EngineParams(gamma_base=0.0)
    p = EngineParams(temp_w=5.0, temp_h=15.0)
    assert 0.0 < carnot(p) < 1.0


def test_coupling_rule():
    p = EngineParams(x=0.9)
    assert coupling(p, "R", 1) == pytest.approx(0.1)
    assert coupling(p, "L", 1) == pytest.approx(1.0)
    assert coupling(p, "H", 0) == coupling(p, "H", 1) == p.gamma_h
    p0 = EngineParams(x=0.0)
    for alpha in ("L", "R"):
        for n in (0, 1):
            assert coupling(p0, alpha, n) == pytest.approx(1.0)


def test_coupling_explicit_override():
    p = EngineParams(explicit_couplings=(1.0, 2.0, 3.0, 4.0))
    assert coupling(p, "L", 0) == 1.0
    assert coupling(p, "L", 1) == 2.0
    assert coupling(p, "R", 0) == 3.0
    assert coupling(p, "R", 1) == 4.0


def test_asymmetry_reference_values():
    assert asymmetry(EngineParams(x=0.0)) == pytest.approx(0.0, abs=1e-15)
    # suppression rule at x = 1 gives couplings (1, 1, 1, 0)
    assert asymmetry(EngineParams(x=1.0)) == pytest.approx(0.5)
    assert asymmetry(EngineParams(x=0.9)) == pytest.approx(9.0 / 22.0)


def test_asymmetry_antisymmetric_under_lr_swap():
    p = EngineParams(explicit_couplings=(1.0, 0.4, 0.7, 1.3))
    q = EngineParams(explicit_couplings=(0.7, 1.3, 1.0, 0.4))
    assert asymmetry(p) == pytest.approx(-asymmetry(q), rel=1e-14)


def test_asymmetry_degenerate_couplings():
    with pytest.raises(DegenerateCouplingError):
        asymmetry(EngineParams(explicit_couplings=(0.0, 1.0, 0.0, 1.0)))


def test_rates_unbiased_symmetric_point():
    p = EngineParams(eps_w=0.0, eps_h=0.0, coulomb_u=0.0, delta_mu=0.0,
                     temp_w=5.0, temp_h=5.0, x=0.0)
    tr = rates(p)
    for alpha in ("L", "R", "H"):
        for n in (0, 1):
            assert tr.w_plus[(alpha, n)] == pytest.approx(0.5)


def test_rates_sum_to_coupling():
    tr = rates(EngineParams())
    p = EngineParams()
    for alpha in ("L", "R", "H"):
        for n in (0, 1):
            assert tr.gamma(alpha, n) == pytest.approx(coupling(p, alpha, n), rel=1e-14)


def test_rates_reference_value():
    tr = rates(EngineParams())
    assert tr.w_plus[("R", 1)] == pytest.approx(0.1 * fermi(5.0, 0.0, 5.0), rel=1e-14)


@given(st.floats(0.0, 1.0), st.floats(0.2, 40.0), st.floats(0.2, 40.0),
       st.floats(-3.0, 3.0), st.floats(-3.0, 3.0), st.floats(0.0, 10.0),
       st.floats(-2.0, 2.0))
@settings(max_examples=60, deadline=None)
def test_local_detailed_balance(x, temp_w, temp_h, eps_w, eps_h, u, dmu):
    """w-/w+ = exp(beta (eps + U n - F)) with F_L = delta_mu, F_R = F_H = 0."""
    p = EngineParams(eps_w=eps_w, eps_h=eps_h, coulomb_u=u, delta_mu=dmu,
                     temp_w=temp_w, temp_h=temp_h, x=x)
    tr = rates(p)
    for alpha, beta, level, force in (("L", p.beta_w, eps_w, dmu),
                                      ("R", p.beta_w, eps_w, 0.0),
                                      ("H", p.beta_h, eps_h, 0.0)):
        for n in (0, 1):
            wp, wm = tr.w_plus[(alpha, n)], tr.w_minus[(alpha, n)]
            if wp == 0.0:
                continue
            expected = math.exp(beta * (level + u * n - force))
            assert wm / wp == pytest.approx(expected, rel=1e-12)


def test_generator_columns_sum_to_zero():
    rng = np.random.default_rng(3)
    for _ in range(25):
        p = EngineParams(eps_w=rng.uniform(-2, 2), eps_h=rng.uniform(-2, 2),
                         coulomb_u=rng.uniform(0, 8), delta_mu=rng.uniform(-1, 1),
                         temp_w=rng.uniform(0.5, 30), temp_h=rng.uniform(0.5, 30),
                         x=rng.uniform(0, 1))
        gen = build_generator(p)
        np.testing.assert_allclose(gen.sum(axis=0), 0.0, atol=1e-14)
        off = gen - np.diag(np.diag(gen))
        assert np.all(off >= 0.0)
        assert np.all(np.diag(gen) <= 0.0)


def test_generator_no_double_jumps():
    gen = build_generator(EngineParams())
    assert gen[0, 3] == gen[3, 0] == 0.0
    assert gen[1, 2] == gen[2, 1] == 0.0


def test_generator_hot_jump_placement():
    tr = rates(EngineParams())
    gen = generator(tr)
    assert gen[1, 0] == pytest.approx(tr.w_plus[("H", 0)])
    assert gen[0, 1] == pytest.approx(tr.w_minus[("H", 0)])


def test_gibbs_state_is_stationary_at_equilibrium():
    p = EngineParams(eps_w=0.3, eps_h=-0.2, coulomb_u=1.7, delta_mu=0.0,
                     temp_w=5.0, temp_h=5.0, x=0.37)
    gen = build_generator(p)
    energies = np.array([0.0, p.eps_h, p.eps_w, p.eps_w + p.eps_h + p.coulomb_u])
    gibbs = np.exp(-energies / p.temp_w)
    gibbs /= gibbs.sum()
    np.testing.assert_allclose(gen @ gibbs, 0.0, atol=1e-14)

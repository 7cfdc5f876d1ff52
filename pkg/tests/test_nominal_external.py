import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from crisissim.model_state import Params, Regime, regime_codes
from crisissim.nominal_external import (
    BoPFlows,
    FxRegime,
    capital_account,
    capital_flight,
    current_account,
    debt_logistic,
    debt_update,
    effective_rate_update,
    gap_update,
    inflation_update,
    monetary_impulse,
    neutral_rate,
    official_fx_update,
    pass_through,
    reserve_scarcity,
    reserves_update,
    risk_premium_target,
    risk_premium_update,
    taylor_rate,
)
from crisissim.real_fiscal import FiscalImpulse

P = Params()


def test_pass_through_midpoint_exact():
    assert pass_through(P.R_crit, P) == P.phi_bar / 2


def test_pass_through_examples():
    p = Params(phi_bar=0.2, k_phi=4.0)
    assert pass_through(2 * p.R_crit, p) == pytest.approx(0.003597, abs=5e-7)
    assert pass_through(0.0, p) == pytest.approx(0.19640, abs=5e-6)


@given(r1=st.floats(-0.2, 0.2), r2=st.floats(-0.2, 0.2))
def test_pass_through_decreasing_and_bounded(r1, r2):
    lo, hi = sorted((r1, r2))
    a, b = pass_through(lo, P), pass_through(hi, P)
    assert 0 < b <= a < P.phi_bar
    if hi - lo > 1e-6:
        assert b < a


def test_inflation_fixed_point():
    assert inflation_update(P.pi_star, 0.0, 0.0, 0.2, 0.0, P) == P.pi_star


def test_inflation_examples():
    p = Params(rho_pi=0.5, pi_star=0.01, kappa=0.1)
    assert inflation_update(0.02, 0.0, 0.0, 0.0, 0.0, p) == pytest.approx(0.015, abs=1e-15)
    base = inflation_update(0.01, 0.0, 0.0, 0.0, 0.0, p)
    assert inflation_update(0.01, 0.02, 0.0, 0.0, 0.0, p) - base == pytest.approx(0.002, abs=1e-15)


def test_taylor_examples():
    p = Params(smoothing=0.0, a_pi=1.5, a_g=0.0)
    assert taylor_rate(0.05, p.pi_star, 0.0, p) == pytest.approx(neutral_rate(p), abs=1e-15)
    assert taylor_rate(0.05, p.pi_star + 0.01, 0.0, p) == pytest.approx(neutral_rate(p) + 0.015, abs=1e-15)
    assert taylor_rate(0.0, -0.2, -0.2, p) == 0.0


def test_monetary_impulse_signs():
    assert monetary_impulse(neutral_rate(P), P) == 0.0
    assert monetary_impulse(neutral_rate(P) - 0.01, P) > 0
    p = Params(theta_m=0.0625)
    assert monetary_impulse(neutral_rate(p) + 0.0025, p) == pytest.approx(-0.00015625, abs=1e-18)


def test_risk_premium_examples():
    p = Params(rho_rp=0.8)
    target = risk_premium_target(1.2, 0.05, 1.1, 0.2, False, p)
    assert risk_premium_update(target, 1.2, 0.05, 1.1, 0.2, False, p) == pytest.approx(target, abs=1e-15)
    # pick rp so that the bracket equals 0.03
    q = p.replace(instit_q=p.instit_q + 0.03 - target)
    assert risk_premium_update(0.02, 1.2, 0.05, 1.1, 0.2, False, q) == pytest.approx(0.022, abs=1e-12)
    assert debt_logistic(1e6, p) == pytest.approx(p.f_max)


@given(b1=st.floats(0, 4), b2=st.floats(0, 4), R=st.floats(-0.1, 0.3), U=st.floats(0, 2))
def test_risk_premium_monotone(b1, b2, R, U):
    lo, hi = sorted((b1, b2))
    f = lambda b, R, U: risk_premium_update(0.02, b, R, 1.1, U, False, P)
    assert f(hi, R, U) >= f(lo, R, U)
    assert f(lo, R, U + 0.1) >= f(lo, R, U)
    assert f(lo, R + 0.01, U) <= f(lo, R, U)


def test_ifi_relief_lowers_premium():
    assert risk_premium_update(0.02, 1.2, 0.05, 1.1, 0.2, True, P) < risk_premium_update(
        0.02, 1.2, 0.05, 1.1, 0.2, False, P)


def test_effective_rate_examples():
    assert effective_rate_update(P.r_f + 0.01, 0.01, P) == pytest.approx(P.r_f + 0.01, abs=1e-15)
    p = Params(lambda_mat=0.1, r_f=0.01)
    assert effective_rate_update(0.01, 0.02, p) == pytest.approx(0.012, abs=1e-15)
    p1 = Params(lambda_mat=1.0)
    assert effective_rate_update(0.5, 0.02, p1) == p1.r_f + 0.02


@given(b=st.floats(0, 5), r=st.floats(-0.05, 0.1))
def test_debt_identity_at_r_equals_g(b, r):
    assert debt_update(b, r, r, 0.0, 1.0, P) == b


def test_debt_example():
    p = Params(lambda_fx=0.5)
    assert debt_update(1.10, 0.02, 0.01, 0.01, 1.10, p) == pytest.approx(1.17589, abs=5e-6)


def test_debt_rejects_collapse():
    with pytest.raises(FloatingPointError):
        debt_update(1.0, 0.01, -1.0, 0.0, 1.0, P)


@given(b=st.floats(0.1, 3), d=st.floats(0, 1))
def test_realignment_valuation_exact(b, d):
    no = debt_update(b, 0.01, 0.005, 0.002, 1.0, P)
    yes = debt_update(b, 0.01, 0.005, 0.002, 1.0 + d, P)
    assert yes - no == pytest.approx(P.lambda_fx * b * d, rel=1e-9, abs=1e-15)


def test_current_account_examples():
    p = Params(eta_CA_g=-0.1, eta_CA_S=0.05)
    assert current_account(0.0, 0.0, FiscalImpulse(), 0.0, p) == p.CA_bar
    assert current_account(0.0, 0.02, FiscalImpulse(), 0.0, p) - p.CA_bar == pytest.approx(-0.002, abs=1e-15)
    assert current_account(0.10, 0.0, FiscalImpulse(), 0.0, p) - p.CA_bar == pytest.approx(0.005, abs=1e-15)


def test_capital_account_examples():
    assert capital_account(0.0, 0.0, 1.0, False, 0.0123, P) == 0.0123
    p = Params(c_B=0.5, eta_KA_rp=-1e-9, eta_KA_U=-1e-9)
    assert capital_flight(1.2, 0.5) == pytest.approx(0.02)
    assert capital_account(0.0, 0.0, 1.2, False, 0.0, p) == pytest.approx(-0.02)
    assert capital_account(0.0, 0.0, 1.2, True, 0.0, p, d_cfm=0.5) == pytest.approx(-0.01)


@given(rp=st.floats(0, 0.1), U=st.floats(0, 2), B=st.floats(1, 3), eps=st.floats(-0.05, 0.05))
def test_cfm_dominance(rp, U, B, eps):
    free = capital_account(rp, U, B, False, eps, P)
    managed = capital_account(rp, U, B, True, eps, P)
    assert abs(managed) <= abs(free)


def test_reserves_examples():
    assert reserves_update(0.1, BoPFlows(0.01, -0.005), 0.0) == pytest.approx(0.105, abs=1e-15)
    R = 0.0
    for _ in range(8):
        R = reserves_update(R, BoPFlows(0.0, 0.0), 0.0125)
    assert R == pytest.approx(0.10, abs=1e-15)


@given(R=st.floats(-1, 1), ca=st.floats(-0.1, 0.1), ka=st.floats(-0.1, 0.1), inj=st.floats(0, 0.1))
def test_reserves_conservation(R, ca, ka, inj):
    flows = BoPFlows(ca, ka)
    assert reserves_update(R, flows, inj) - R == pytest.approx(flows.dR + inj, abs=1e-12)


def test_reserves_crossing_flips_regime():
    R_next = reserves_update(P.R_crit + 0.001, BoPFlows(-0.002, 0.0))
    assert regime_codes(P.R_crit + 0.001, 1.0, 0.0, P) == Regime.BOOM
    assert regime_codes(R_next, 1.0, 0.0, P) == Regime.CRISIS


def test_fx_fixed_and_crawl():
    S, realigned, cd = official_fx_update(1.0, 0.5, FxRegime(), 0, 0.0, P)
    assert S == 1.0 and not realigned and cd == 0
    assert FxRegime.crawl_from_annual(0.15).crawl == pytest.approx(0.03556, abs=5e-6)
    S, _, _ = official_fx_update(1.0, 0.5, FxRegime.crawl_from_annual(0.15), 0, 0.0, P)
    assert S ** 4 == pytest.approx(1.15)


def test_fx_realignment_hazard():
    p = Params(dev_size=0.30, p_realign=0.25)
    S, realigned, cd = official_fx_update(1.0, p.R_crit, FxRegime(), 0, 0.1, p)
    assert S == pytest.approx(1.30) and realigned and cd == p.realign_cooldown
    # no realignment while the draw misses, or during cooldown, or with ample reserves
    assert not official_fx_update(1.0, p.R_crit, FxRegime(), 0, 0.9, p)[1]
    assert not official_fx_update(1.0, p.R_crit, FxRegime(), 2, 0.1, p)[1]
    assert not official_fx_update(1.0, 2 * p.R_crit, FxRegime(), 0, 0.1, p)[1]
    b = 1.2
    jump = debt_update(b, 0.0, 0.0, 0.0, float(S), p) - b
    assert jump == pytest.approx(p.lambda_fx * b * 0.30)


def test_fx_regime_validation():
    with pytest.raises(ValueError):
        FxRegime("float")
    with pytest.raises(ValueError):
        FxRegime("fixed", 0.01)


def test_gap_examples():
    assert reserve_scarcity(P.R_crit, P) == 0.0
    assert reserve_scarcity(P.R_crit / 2, P) == pytest.approx(1.0)
    assert reserve_scarcity(0.0, P) == P.scarcity_cap
    p = Params(alpha_B_rp=0.0, alpha_B_U=0.0)
    assert gap_update(1.3, 1.0, 0.0, 0.0, 0.0, 0.0, p) == 1.3
    expected = 1.3 * math.exp(p.alpha_B_R * 1.0)
    assert gap_update(1.3, p.R_crit / 2, 0.0, 0.0, 0.0, 0.0, p) == pytest.approx(expected)


@given(B=st.floats(1, 5), R=st.floats(-1, 1), rp=st.floats(0, 0.2), U=st.floats(0, 3),
       C=st.floats(0, 1), eps=st.floats(-1, 1))
def test_gap_floor(B, R, rp, U, C, eps):
    assert gap_update(B, R, rp, U, C, eps, P) >= 1.0


def test_vectorised_blocks_match_scalar():
    R = np.array([0.01, 0.03, 0.2])
    np.testing.assert_array_equal(pass_through(R, P), [pass_through(float(x), P) for x in R])

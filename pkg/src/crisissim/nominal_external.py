"""Prices, monetary policy, sovereign risk, debt dynamics, balance of payments
and the dual exchange-rate system."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model_state import Params
from .real_fiscal import FiscalImpulse


@dataclass(frozen=True)
class BoPFlows:
    CA: np.ndarray
    KA: np.ndarray

    @property
    def dR(self):
        return self.CA + self.KA


@dataclass(frozen=True)
class FxRegime:
    """Official exchange-rate arrangement.

    ``kind`` is ``"fixed"`` or ``"crawl"``; ``crawl`` is the quarterly rate of
    the crawling peg.  The post-realignment state is tracked per path by a
    cooldown counter in the state vector rather than here.
    """

    kind: str = "fixed"
    crawl: float = 0.0

    def __post_init__(self):
        if self.kind not in ("fixed", "crawl"):
            raise ValueError(f"unknown FX regime {self.kind!r}")
        if self.crawl < 0:
            raise ValueError("crawl rate must be >= 0")
        if self.kind == "fixed" and self.crawl != 0:
            raise ValueError("a fixed regime has no crawl rate")

    @classmethod
    def crawl_from_annual(cls, annual: float) -> "FxRegime":
        return cls("crawl", (1.0 + annual) ** 0.25 - 1.0)


def pass_through(R, params: Params):
    return params.phi_bar / (1.0 + np.exp(params.k_phi * (R / params.R_crit - 1.0)))


def inflation_update(pi, gap, dlnS_par, phi, eps_pi, params: Params):
    return (
        params.rho_pi * pi
        + params.kappa * gap
        + phi * dlnS_par
        + (1.0 - params.rho_pi) * params.pi_star
        + eps_pi
    )


def neutral_rate(params: Params) -> float:
    return params.r_f + params.pi_star


def taylor_rate(i_pol, pi, gap, params: Params):
    target = (
        neutral_rate(params)
        + params.a_pi * (pi - params.pi_star)
        + params.a_g * gap
        + params.rate_shock
    )
    return np.maximum(0.0, params.smoothing * i_pol + (1.0 - params.smoothing) * target)


def monetary_impulse(i_pol, params: Params):
    return -params.theta_m * (i_pol - neutral_rate(params))


def debt_logistic(b, params: Params):
    return params.f_max / (1.0 + np.exp(-params.k_f * (b - params.b_mid)))


def risk_premium_target(b, R, B, Unrest, ifi_active, params: Params):
    return (
        debt_logistic(b, params)
        + params.beta_R * R
        + params.beta_B * (B - 1.0)
        + params.beta_U * Unrest
        + params.beta_IFI * np.asarray(ifi_active, dtype=float)
        + params.instit_q
    )


def risk_premium_update(rp, b, R, B, Unrest, ifi_active, params: Params):
    target = risk_premium_target(b, R, B, Unrest, ifi_active, params)
    return np.maximum(0.0, params.rho_rp * rp + (1.0 - params.rho_rp) * target)


def effective_rate_update(r_eff, rp, params: Params):
    lam = params.lambda_mat
    return (1.0 - lam) * r_eff + lam * (params.r_f + rp)


def debt_update(b, r_eff, ghat, pd, S_off_ratio, params: Params):
    """Debt/GDP one quarter ahead.  ``S_off_ratio`` is S_off' / S_off."""
    if np.any(np.asarray(ghat) <= -1.0):
        raise FloatingPointError("debt_update: nominal growth at or below -100%")
    # ratio first so r_eff == ghat is exactly the identity
    return b * ((1.0 + r_eff) / (1.0 + ghat)) + pd + params.lambda_fx * b * (S_off_ratio - 1.0)


def current_account(dlnS_par, gap, impulse: FiscalImpulse, eps_ca, params: Params):
    return (
        params.CA_bar
        + params.eta_CA_S * dlnS_par
        + params.eta_CA_g * gap
        + params.eta_CA_GC * impulse.dGC
        + params.eta_CA_GI * impulse.dGI
        + params.eta_CA_TR * impulse.dTR
        + eps_ca
    )


def capital_flight(B, c_B):
    """Quadratic acceleration of outflows as the parallel gap widens."""
    return c_B * np.maximum(0.0, B - 1.0) ** 2


def capital_account(rp, Unrest, B, cfm_active, eps_ka, params: Params, d_cfm=None):
    """Capital account.  Under CFM the outflow sensitivities and the shock are damped."""
    d = params.d_cfm if d_cfm is None else d_cfm
    damp = np.where(np.asarray(cfm_active, dtype=bool), d, 1.0)
    return damp * (
        params.eta_KA_rp * rp + params.eta_KA_U * Unrest - capital_flight(B, params.c_B) + eps_ka
    )


def reserves_update(R, flows: BoPFlows, ifi_injection=0.0):
    return R + flows.CA + flows.KA + ifi_injection


def official_fx_update(S_off, R, fx: FxRegime, cooldown, u_realign, params: Params,
                       scheduled_devaluation=0.0):
    """Advance the official rate one quarter.

    A hazard realignment fires when reserves are at or below the critical
    level, no cooldown is running and the uniform draw ``u_realign`` falls
    below ``p_realign``.  A scheduled devaluation from the scenario applies on
    top.  Returns ``(S_off', realigned, cooldown')``.
    """
    S_new = S_off * (1.0 + fx.crawl) if fx.kind == "crawl" else S_off * 1.0
    cooldown = np.asarray(cooldown)
    hazard = (np.asarray(R) <= params.R_crit) & (cooldown <= 0) & (np.asarray(u_realign) < params.p_realign)
    S_new = np.where(hazard, S_new * (1.0 + params.dev_size), S_new)
    realigned = hazard
    if scheduled_devaluation:
        S_new = S_new * (1.0 + scheduled_devaluation)
        realigned = np.ones_like(hazard)
    new_cooldown = np.where(realigned, params.realign_cooldown, np.maximum(cooldown - 1, 0)).astype(
        np.int16
    )
    return S_new, realigned, new_cooldown


def reserve_scarcity(R_next, params: Params):
    """max(0, R_crit/R' - 1), saturating at ``scarcity_cap`` (also for R' <= 0)."""
    R_next = np.asarray(R_next, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        raw = np.where(R_next > 0, params.R_crit / np.where(R_next > 0, R_next, 1.0) - 1.0, np.inf)
    return np.minimum(np.maximum(0.0, raw), params.scarcity_cap)


def gap_update(B, R_next, rp, Unrest, Cred, eps_B, params: Params):
    """Parallel-market gap one quarter ahead, floored at 1."""
    dlnB = (
        params.alpha_B_R * reserve_scarcity(R_next, params)
        + params.alpha_B_rp * rp
        + params.alpha_B_U * Unrest
        - params.alpha_B_cred * Cred
        + eps_B
    )
    return np.maximum(1.0, B * np.exp(dlnB))

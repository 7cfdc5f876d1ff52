"""Output, potential output, public capital, revenues and the primary-balance rule."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .model_state import Params

IMPULSE_BOUND = 0.25


@dataclass(frozen=True)
class FiscalImpulse:
    """Per-quarter change in current spending, investment and transfers (share of GDP)."""

    dGC: float = 0.0
    dGI: float = 0.0
    dTR: float = 0.0

    def __post_init__(self):
        for name in ("dGC", "dGI", "dTR"):
            v = getattr(self, name)
            if not np.isfinite(v) or abs(v) > IMPULSE_BOUND:
                raise ValueError(f"{name}={v} outside the sanity bound +-{IMPULSE_BOUND}")

    @property
    def total(self) -> float:
        return self.dGC + self.dGI + self.dTR

    def __add__(self, other: "FiscalImpulse") -> "FiscalImpulse":
        return FiscalImpulse(self.dGC + other.dGC, self.dGI + other.dGI, self.dTR + other.dTR)


def growth_update(impulse: FiscalImpulse, mu, z, m, eps_d):
    """Log growth of real output over the quarter.

    ``mu`` is a mapping or sequence of drawn multipliers ordered (GC, TR, GI).
    All three impulse terms enter with a positive sign.  Non-finite results
    are not raised here; the engine aborts the affected path.
    """
    mu_gc, mu_tr, mu_gi = _unpack_mu(mu)
    return mu_gc * impulse.dGC + mu_gi * impulse.dGI + mu_tr * impulse.dTR + z + m + eps_d


def _unpack_mu(mu):
    if isinstance(mu, dict):
        return mu["GC"], mu["TR"], mu["GI"]
    return mu[0], mu[1], mu[2]


def investment_level(impulse: FiscalImpulse, params: Params) -> float:
    """Public investment share this quarter: baseline plus discretionary change."""
    return params.GI_base + impulse.dGI


def public_capital_update(K_pub, investment, Y, delta_p):
    """``investment`` is a GDP share; ``investment * Y`` is spending in index units."""
    return (1.0 - delta_p) * K_pub + investment * Y


def potential_update(dK, Y, Gini, params: Params):
    """Log growth of potential output."""
    return params.g_pot + params.alpha_p * dK / Y + params.beta_gini * (Gini - params.Gini_bar)


def revenue_ratio(gap, pi, Cred, params: Params, lvt_shift=0.0):
    """Revenue/GDP.  ``lvt_shift`` is the permanent rise of the structural ratio."""
    return (
        params.tau_bar
        + lvt_shift
        + params.beta_g * gap
        + params.beta_pi * pi
        + params.beta_cred * (Cred - params.Cred_bar)
    )


def convergence_factor(t, params: Params):
    return expit(params.k_a * (t - params.t_mid))


def primary_balance_target(t, regime, r_eff, ghat, b, params: Params, a_t=None):
    """Targeted primary deficit: logistic glide from pd0 to pd_target, minus a
    debt-stabilising correction scaled by the regime's gamma.

    ``regime`` may be a :class:`Regime` or an array of regime codes.
    """
    if a_t is None:
        a_t = convergence_factor(t, params)
    gamma = params.gamma_table()[np.asarray(regime, dtype=int)]
    return (1.0 - a_t) * params.pd0 + a_t * params.pd_target - gamma * (r_eff - ghat) * b


def observed_deficit(pd_star, impulse: FiscalImpulse, tau, params: Params):
    """Realised primary deficit.

    Revenue surprises are measured against the pre-reform structural ratio, so
    an LVT shift in ``tau`` lowers the deficit one-for-one.
    """
    return pd_star + impulse.total - (tau - params.tau_bar)

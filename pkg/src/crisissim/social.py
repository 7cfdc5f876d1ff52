"""Employment, wages, inequality, health, unrest, credibility and welfare."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .model_state import WELFARE_COMPONENTS, Params

log = logging.getLogger(__name__)


def _clamp(x, lo, hi, name):
    out = np.clip(x, lo, hi)
    if log.isEnabledFor(logging.DEBUG):
        n = int(np.count_nonzero(out != x))
        if n:
            log.debug("clamp bound for %s on %d path(s)", name, n)
    return out


def employment_update(E, gap, r_eff, ghat, dlnw, eps_E, params: Params):
    """Blended demand/supply employment; anchored at E_bar, clamped to [0, 1]."""
    om = params.omega_E
    target = params.E_bar + params.phi_d * gap - params.phi_r * (r_eff - ghat)
    raw = (1.0 - om) * E + om * target + (1.0 - om) * params.eta_s * dlnw + eps_E
    return _clamp(raw, 0.0, 1.0, "E")


def wage_growth(pi, E, params: Params):
    return params.chi_w * (pi - params.pi_star) + params.chi_E * (E - params.E_bar)


def wage_update(w, pi, E, params: Params):
    """Returns ``(w', dln w)``."""
    dlnw = wage_growth(pi, E, params)
    return w * np.exp(dlnw), dlnw


def gini_update(Gini, dTR, E_next, eps_gini, params: Params):
    raw = Gini + params.beta_G_TR * dTR + params.beta_G_E * (1.0 - E_next) + eps_gini
    return _clamp(raw, 0.0, 1.0, "Gini")


def health_update(Health, E, dTR, Gini, params: Params):
    raw = (
        Health
        + params.lambda_HE * (E - params.E_bar)
        + params.lambda_HTR * max(0.0, dTR)
        - params.lambda_HG * (Gini - params.Gini_bar)
    )
    return _clamp(raw, 0.0, 1.0, "Health")


def unrest_update(Unrest, Gini, pi, austerity, params: Params):
    """``austerity`` is dGC + dTR; only cuts (negative values) stoke unrest."""
    raw = (
        params.rho_U * Unrest
        + params.lambda_UG * (Gini - params.Gini_bar)
        + params.lambda_Upi * np.maximum(0.0, pi - params.pi_star)
        + params.lambda_Uaust * max(0.0, -austerity)
    )
    return np.maximum(0.0, raw)


@dataclass(frozen=True)
class CredEvents:
    ifi_start: bool = False
    lvt_start: bool = False
    restructuring: bool = False
    realigned: np.ndarray | bool = False
    ifi_gain: float | None = None
    lvt_gain: float | None = None


def credibility_update(Cred, events: CredEvents, params: Params):
    gain_ifi = params.gain_IFI if events.ifi_gain is None else events.ifi_gain
    gain_lvt = params.gain_LVT if events.lvt_gain is None else events.lvt_gain
    raw = (
        params.rho_C * Cred
        + (1.0 - params.rho_C) * params.Cred_bar
        + gain_ifi * events.ifi_start
        + gain_lvt * events.lvt_start
        - params.loss_realign * np.asarray(events.realigned, dtype=float)
        - params.loss_restruct * events.restructuring
    )
    return _clamp(raw, 0.0, 1.0, "Cred")


@dataclass(frozen=True)
class WelfareWeights:
    weights: tuple[float, ...]
    centers: tuple[float, ...]
    scales: tuple[float, ...]

    def __post_init__(self):
        if not len(self.weights) == len(self.centers) == len(self.scales) == len(WELFARE_COMPONENTS):
            raise ValueError("welfare index needs exactly 8 weights, centers and scales")
        if any(s == 0 for s in self.scales):
            raise ValueError("welfare normalisation scale must be non-zero")

    @classmethod
    def from_params(cls, params: Params) -> "WelfareWeights":
        return cls(
            tuple(getattr(params, f"w_{c}") for c in WELFARE_COMPONENTS),
            tuple(getattr(params, f"center_{c}") for c in WELFARE_COMPONENTS),
            tuple(getattr(params, f"scale_{c}") for c in WELFARE_COMPONENTS),
        )


def welfare_components(state):
    """Raw indicators in WELFARE_COMPONENTS order."""
    return (
        np.log(state.Y),
        state.E,
        state.Health,
        state.pi,
        state.b,
        state.S_par / state.S_off,
        state.Unrest,
        state.Gini,
    )


def welfare_from_components(values, weights: WelfareWeights):
    total = 0.0
    for x, w, c, s in zip(values, weights.weights, weights.centers, weights.scales):
        total = total + w * (x - c) / s
    return total


def welfare_index(state, weights: WelfareWeights | Params):
    """Ordinal welfare score: weighted sum of affinely normalised indicators."""
    if isinstance(weights, Params):
        weights = WelfareWeights.from_params(weights)
    return welfare_from_components(welfare_components(state), weights)

"""State vector, parameter set, regime classification and invariant checks.

Every block in the simulator operates on :class:`StateVector`, whose numeric
fields are either Python floats (a single economy) or 1-D numpy arrays with
one entry per Monte Carlo path.  All block functions are written with numpy
ufuncs so the same code serves both cases.
"""

from __future__ import annotations

import dataclasses
import enum
import math
from dataclasses import dataclass, field

import numpy as np

EPS_NUM = 1e-12


class Regime(enum.IntEnum):
    BOOM = 0
    RECESSION = 1
    CRISIS = 2


INSTRUMENTS = ("GC", "TR", "GI")
REGIME_NAMES = ("boom", "recession", "crisis")

WELFARE_COMPONENTS = ("gdp", "emp", "health", "infl", "debt", "gap", "unrest", "gini")
# Welfare weights in component order.
WELFARE_WEIGHTS = (0.30, 0.15, 0.10, -0.15, -0.10, -0.08, -0.07, -0.05)

SHOCK_FAMILIES = ("d", "pi", "ca", "ka", "B", "E", "gini", "z")


def _p(default, section, doc=""):
    return field(default=default, metadata={"section": section, "doc": doc})


@dataclass(frozen=True)
class Params:
    """Structural coefficients plus engine auxiliaries.

    Rates are quarterly decimals.  Flows (pd, impulses, CA, KA, injections)
    and stocks (b, R) are shares of GDP.  The defaults are the reference
    calibration shipped in ``calibration/reference.cfg``.
    """

    # regime thresholds
    R_crit: float = _p(0.03, "regime", "critical reserves / GDP")
    B_crisis: float = _p(1.5, "regime", "parallel/official gap that triggers Crisis")

    # real sector
    g_pot: float = _p(0.0025, "growth", "quarterly potential growth")
    delta_p: float = _p(0.0125, "growth", "quarterly public capital depreciation")
    alpha_p: float = _p(0.10, "growth", "potential growth per unit dK/Y")
    beta_gini: float = _p(-0.02, "growth", "potential growth drag of Gini above baseline")
    Gini_bar: float = _p(0.42, "growth", "baseline Gini")
    GC_base: float = _p(0.15, "growth", "baseline current spending share")
    GI_base: float = _p(0.05, "growth", "baseline public investment share")
    TR_base: float = _p(0.04, "growth", "baseline transfers share")

    # multiplier means by regime
    mu_GC_boom: float = _p(0.045, "multipliers")
    mu_GC_recession: float = _p(0.125, "multipliers")
    mu_GC_crisis: float = _p(0.213, "multipliers")
    mu_TR_boom: float = _p(0.075, "multipliers")
    mu_TR_recession: float = _p(0.200, "multipliers")
    mu_TR_crisis: float = _p(0.263, "multipliers")
    mu_GI_boom: float = _p(0.175, "multipliers")
    mu_GI_recession: float = _p(0.388, "multipliers")
    mu_GI_crisis: float = _p(0.525, "multipliers")
    mult_noise_scale: float = _p(0.01, "multipliers", "scale of the Student-t noise")
    mult_dof: float = _p(5.0, "multipliers", "Student-t degrees of freedom")
    mult_per_path: bool = _p(False, "multipliers", "draw noise once per path instead of per quarter")

    # prices
    rho_pi: float = _p(0.6, "inflation", "inflation inertia")
    kappa: float = _p(0.05, "inflation", "Phillips slope on the output gap")
    pi_star: float = _p(0.0075, "inflation", "quarterly inflation target")
    phi_bar: float = _p(0.3, "inflation", "maximum pass-through")
    k_phi: float = _p(4.0, "inflation", "pass-through logistic slope")

    # fiscal
    tau_bar: float = _p(0.07, "fiscal", "structural revenue ratio")
    beta_g: float = _p(0.05, "fiscal")
    beta_pi: float = _p(0.02, "fiscal")
    beta_cred: float = _p(0.01, "fiscal")
    Cred_bar: float = _p(0.5, "fiscal", "baseline credibility")
    pd0: float = _p(0.02, "fiscal", "initial primary deficit target")
    pd_target: float = _p(-0.0025, "fiscal", "medium-term primary balance target")
    gamma_boom: float = _p(0.06, "fiscal")
    gamma_recession: float = _p(0.03, "fiscal")
    gamma_crisis: float = _p(0.01, "fiscal")
    k_a: float = _p(0.5, "fiscal", "slope of the convergence logistic")
    t_mid: float = _p(8.0, "fiscal", "midpoint quarter of the convergence logistic")
    d_tau_lvt: float = _p(0.015, "fiscal", "structural revenue gain from LVT when a scenario omits it")

    # debt and risk
    lambda_fx: float = _p(0.5, "debt", "foreign-currency share of debt")
    r_f: float = _p(0.0075, "debt", "quarterly risk-free rate")
    rho_rp: float = _p(0.8, "debt")
    f_max: float = _p(0.03, "debt", "saturation level of the debt term")
    k_f: float = _p(4.0, "debt", "slope of the debt logistic")
    b_mid: float = _p(1.5, "debt", "midpoint of the debt logistic")
    beta_R: float = _p(-0.05, "debt", "per unit of R/GDP")
    beta_B: float = _p(0.01, "debt")
    beta_U: float = _p(0.005, "debt")
    beta_IFI: float = _p(-0.004, "debt")
    instit_q: float = _p(0.0, "debt", "institutional composite term")
    lambda_mat: float = _p(0.06, "debt", "refinancing share per quarter")

    # external
    CA_bar: float = _p(-0.001, "external")
    eta_CA_S: float = _p(0.1, "external")
    eta_CA_g: float = _p(-0.1, "external")
    eta_CA_GC: float = _p(-0.2, "external")
    eta_CA_GI: float = _p(-0.3, "external")
    eta_CA_TR: float = _p(-0.1, "external")
    eta_KA_rp: float = _p(-0.1, "external")
    eta_KA_U: float = _p(-0.005, "external")
    c_B: float = _p(0.005, "external", "quadratic capital-flight coefficient")
    d_cfm: float = _p(0.5, "external", "CFM damping when a scenario omits it")
    p_realign: float = _p(0.25, "external", "quarterly realignment hazard while R <= R_crit")
    dev_size: float = _p(0.30, "external", "size of a hazard realignment")
    realign_cooldown: int = _p(4, "external", "quarters without a repeat realignment")
    scarcity_cap: float = _p(5.0, "external", "cap on the reserve-scarcity term")

    # parallel market gap
    alpha_B_R: float = _p(0.01, "gap")
    alpha_B_rp: float = _p(0.5, "gap")
    alpha_B_U: float = _p(0.01, "gap")
    alpha_B_cred: float = _p(0.02, "gap")

    # labor
    omega_E: float = _p(0.2, "labor")
    phi_d: float = _p(0.5, "labor")
    phi_r: float = _p(0.5, "labor")
    eta_s: float = _p(0.1, "labor")
    E_bar: float = _p(0.92, "labor")
    chi_w: float = _p(0.5, "labor")
    chi_E: float = _p(0.3, "labor")

    # social
    beta_G_TR: float = _p(-0.05, "social")
    beta_G_E: float = _p(0.004, "social")
    lambda_HE: float = _p(0.1, "social")
    lambda_HTR: float = _p(0.2, "social")
    lambda_HG: float = _p(0.05, "social")
    rho_U: float = _p(0.8, "social")
    lambda_UG: float = _p(0.5, "social")
    lambda_Upi: float = _p(2.0, "social")
    lambda_Uaust: float = _p(2.0, "social")
    rho_C: float = _p(0.9, "social")
    gain_IFI: float = _p(0.05, "social")
    gain_LVT: float = _p(0.05, "social")
    loss_realign: float = _p(0.10, "social")
    loss_restruct: float = _p(0.05, "social")

    # monetary
    a_pi: float = _p(1.5, "monetary")
    a_g: float = _p(0.5, "monetary")
    smoothing: float = _p(0.7, "monetary")
    theta_m: float = _p(0.137, "monetary", "output semi-elasticity of the policy rate gap")
    rate_shock: float = _p(0.0, "monetary", "exogenous add-on to the Taylor target")

    # welfare weights and affine anchors
    w_gdp: float = _p(0.30, "welfare")
    w_emp: float = _p(0.15, "welfare")
    w_health: float = _p(0.10, "welfare")
    w_infl: float = _p(-0.15, "welfare")
    w_debt: float = _p(-0.10, "welfare")
    w_gap: float = _p(-0.08, "welfare")
    w_unrest: float = _p(-0.07, "welfare")
    w_gini: float = _p(-0.05, "welfare")
    center_gdp: float = _p(4.25, "welfare", "in ln Y")
    center_emp: float = _p(0.0, "welfare")
    center_health: float = _p(0.0, "welfare")
    center_infl: float = _p(0.0, "welfare")
    center_debt: float = _p(0.0, "welfare")
    center_gap: float = _p(1.0, "welfare")
    center_unrest: float = _p(0.0, "welfare")
    center_gini: float = _p(0.0, "welfare")
    scale_gdp: float = _p(0.01, "welfare")
    scale_emp: float = _p(0.01, "welfare")
    scale_health: float = _p(0.01, "welfare")
    scale_infl: float = _p(0.0025, "welfare", "one annualized percentage point")
    scale_debt: float = _p(0.01, "welfare")
    scale_gap: float = _p(0.01, "welfare")
    scale_unrest: float = _p(0.01, "welfare")
    scale_gini: float = _p(0.01, "welfare")

    # shocks
    sigma_d: float = _p(0.004, "shocks")
    dof_d: float = _p(5.0, "shocks")
    sigma_pi: float = _p(0.002, "shocks")
    dof_pi: float = _p(math.inf, "shocks")
    sigma_ca: float = _p(0.002, "shocks")
    dof_ca: float = _p(math.inf, "shocks")
    sigma_ka: float = _p(0.003, "shocks")
    dof_ka: float = _p(5.0, "shocks")
    sigma_B: float = _p(0.01, "shocks")
    dof_B: float = _p(5.0, "shocks")
    sigma_E: float = _p(0.002, "shocks")
    dof_E: float = _p(math.inf, "shocks")
    sigma_gini: float = _p(0.001, "shocks")
    dof_gini: float = _p(math.inf, "shocks")
    sigma_z: float = _p(0.002, "shocks")
    dof_z: float = _p(math.inf, "shocks")
    rho_z: float = _p(0.7, "shocks")

    # initial conditions
    Y0: float = _p(100.0, "initial")
    Y_pot0: float = _p(100.0, "initial")
    K_pub0: float = _p(400.0, "initial", "GI_base * Y0 / delta_p, so baseline dK = 0")
    pi0: float = _p(0.01, "initial")
    b0: float = _p(1.10, "initial")
    r_eff0: float = _p(0.012, "initial")
    rp0: float = _p(0.01, "initial")
    i_pol0: float = _p(0.02, "initial")
    R0: float = _p(0.06, "initial")
    B0: float = _p(1.2, "initial")
    E0: float = _p(0.92, "initial")
    w0: float = _p(1.0, "initial")
    Gini0: float = _p(0.42, "initial")
    Health0: float = _p(0.6, "initial")
    Unrest0: float = _p(0.1, "initial")
    Cred0: float = _p(0.5, "initial")

    def multiplier_mean(self, instrument: str, regime: Regime | str) -> float:
        name = regime if isinstance(regime, str) else REGIME_NAMES[int(regime)]
        return getattr(self, f"mu_{instrument}_{name.lower()}")

    def multiplier_table(self) -> np.ndarray:
        """(3 regimes x 3 instruments) array, rows Boom/Recession/Crisis, cols GC/TR/GI."""
        return np.array(
            [[self.multiplier_mean(i, r) for i in INSTRUMENTS] for r in REGIME_NAMES]
        )

    def gamma_table(self) -> np.ndarray:
        return np.array([self.gamma_boom, self.gamma_recession, self.gamma_crisis])

    def replace(self, **changes) -> "Params":
        return dataclasses.replace(self, **changes)

    def deterministic(self) -> "Params":
        """Copy with every stochastic scale zeroed, including the realignment hazard."""
        zeros = {f"sigma_{s}": 0.0 for s in SHOCK_FAMILIES}
        return self.replace(mult_noise_scale=0.0, p_realign=0.0, **zeros)


def param_sections() -> dict[str, list[str]]:
    out: dict[str, list[str]] = {}
    for f in dataclasses.fields(Params):
        out.setdefault(f.metadata["section"], []).append(f.name)
    return out


@dataclass(frozen=True)
class StateVector:
    """Economy state at the start of quarter ``t``.

    Flow fields (``pd``, ``tau``, ``CA``, ``KA``) hold the values realised
    over the quarter that ended at ``t``.  ``ghat`` is the last realised
    nominal growth, ``dlnS_par`` and ``dlnw`` the last realised log changes.
    """

    t: int
    Y: np.ndarray
    Y_pot: np.ndarray
    K_pub: np.ndarray
    pi: np.ndarray
    pi_prev: np.ndarray
    b: np.ndarray
    pd: np.ndarray
    r_eff: np.ndarray
    rp: np.ndarray
    i_pol: np.ndarray
    R: np.ndarray
    S_off: np.ndarray
    S_par: np.ndarray
    tau: np.ndarray
    E: np.ndarray
    w: np.ndarray
    Gini: np.ndarray
    Health: np.ndarray
    Unrest: np.ndarray
    Cred: np.ndarray
    z: np.ndarray
    regime: np.ndarray
    ghat: np.ndarray
    dlnS_par: np.ndarray
    dlnw: np.ndarray
    CA: np.ndarray
    KA: np.ndarray
    W: np.ndarray
    cooldown: np.ndarray
    realigned: np.ndarray
    last_event_quarter: int = -1

    @property
    def B(self):
        return self.S_par / self.S_off

    @property
    def gap(self):
        return output_gap(self)

    @property
    def depleted(self):
        return np.asarray(self.R) <= 0.0

    def replace(self, **changes) -> "StateVector":
        return dataclasses.replace(self, **changes)


# Recorded per quarter; ``regime`` is stored as its integer code.
FLOAT_FIELDS = tuple(
    f.name
    for f in dataclasses.fields(StateVector)
    if f.name not in ("t", "regime", "cooldown", "realigned", "last_event_quarter")
)


def output_gap(state) -> np.ndarray:
    Y = np.asarray(state.Y, dtype=float)
    Y_pot = np.asarray(state.Y_pot, dtype=float)
    if not (np.all(np.isfinite(Y)) and np.all(np.isfinite(Y_pot))):
        raise ValueError("output_gap: non-finite output")
    if np.any(Y_pot <= 0):
        raise ValueError("output_gap: potential output must be positive")
    return (Y - Y_pot) / Y_pot


def regime_codes(R, B, gap, params: Params) -> np.ndarray:
    """Vectorised regime rule; Crisis test takes precedence, gap == 0 is Boom."""
    crisis = (np.asarray(R) <= params.R_crit) | (np.asarray(B) > params.B_crisis)
    recession = np.asarray(gap) < 0
    return np.where(crisis, Regime.CRISIS, np.where(recession, Regime.RECESSION, Regime.BOOM)).astype(
        np.int8
    )


def classify_regime(state, params: Params):
    codes = regime_codes(state.R, state.S_par / state.S_off, output_gap(state), params)
    if codes.ndim == 0:
        return Regime(int(codes))
    return codes


def initial_state(params: Params, n_paths: int | None = None) -> StateVector:
    """Reference starting point; scalars when ``n_paths`` is None."""

    def v(x):
        if n_paths is None:
            return np.float64(x)
        return np.full(n_paths, x, dtype=float)

    zero = v(0.0)
    st = StateVector(
        t=0,
        Y=v(params.Y0),
        Y_pot=v(params.Y_pot0),
        K_pub=v(params.K_pub0),
        pi=v(params.pi0),
        pi_prev=v(params.pi0),
        b=v(params.b0),
        pd=v(params.pd0),
        r_eff=v(params.r_eff0),
        rp=v(params.rp0),
        i_pol=v(params.i_pol0),
        R=v(params.R0),
        S_off=v(1.0),
        S_par=v(params.B0),
        tau=v(params.tau_bar),
        E=v(params.E0),
        w=v(params.w0),
        Gini=v(params.Gini0),
        Health=v(params.Health0),
        Unrest=v(params.Unrest0),
        Cred=v(params.Cred0),
        z=zero,
        regime=np.zeros(() if n_paths is None else n_paths, dtype=np.int8),
        ghat=v(params.pi0),
        dlnS_par=zero,
        dlnw=zero,
        CA=zero,
        KA=zero,
        W=zero,
        cooldown=np.zeros(() if n_paths is None else n_paths, dtype=np.int16),
        realigned=np.zeros(() if n_paths is None else n_paths, dtype=bool),
    )
    # imported lazily: social depends on this module
    from .social import welfare_index

    st = st.replace(regime=regime_codes(st.R, st.B, output_gap(st), params))
    return st.replace(W=welfare_index(st, params))


def _bad(x, cond) -> bool:
    return bool(np.any(cond(np.asarray(x, dtype=float))))


def validate_state(state) -> list[str]:
    out = []
    for name in FLOAT_FIELDS:
        if not np.all(np.isfinite(np.asarray(getattr(state, name), dtype=float))):
            out.append(f"{name} not finite")
    if _bad(state.Y, lambda x: x <= 0):
        out.append("Y must be > 0")
    if _bad(state.Y_pot, lambda x: x <= 0):
        out.append("Y_pot must be > 0")
    if _bad(state.S_off, lambda x: x <= 0):
        out.append("S_off must be > 0")
    if _bad(state.S_par, lambda x: x <= 0):
        out.append("S_par must be > 0")
    if _bad(state.S_par / state.S_off, lambda x: x < 1.0 - EPS_NUM):
        out.append("B below 1")
    for name in ("E", "Gini", "Health", "Cred"):
        if _bad(getattr(state, name), lambda x: (x < 0) | (x > 1)):
            out.append(f"{name} out of [0,1]")
    if _bad(state.Unrest, lambda x: x < 0):
        out.append("Unrest negative")
    if _bad(state.b, lambda x: x < 0):
        out.append("b negative")
    return out


def validate_params(params: Params) -> list[str]:
    out = []
    table = params.multiplier_table()
    for r, rname in enumerate(REGIME_NAMES):
        gc, tr, gi = table[r]
        if not gi > tr > gc:
            out.append(f"multiplier hierarchy violated in {rname}: need GI > TR > GC")
    for i, iname in enumerate(INSTRUMENTS):
        boom, rec, cri = table[:, i]
        if not cri > rec > boom:
            out.append(f"multiplier hierarchy violated for {iname}: need Crisis > Recession > Boom")
    if not params.gamma_crisis < params.gamma_recession < params.gamma_boom:
        out.append("gamma must satisfy crisis < recession < boom")

    scales = ["mult_noise_scale"] + [f"sigma_{s}" for s in SHOCK_FAMILIES]
    for name in scales:
        if getattr(params, name) < 0:
            out.append(f"{name} must be >= 0")
    for name in ["mult_dof"] + [f"dof_{s}" for s in SHOCK_FAMILIES]:
        if not getattr(params, name) > 2:
            out.append(f"{name} must be > 2")
    for name in ("rho_pi", "rho_rp", "rho_z", "rho_U", "smoothing", "rho_C"):
        if not 0 <= getattr(params, name) < 1:
            out.append(f"{name} must lie in [0,1)")
    for name in ("k_phi", "k_f", "k_a"):
        if not getattr(params, name) > 0:
            out.append(f"{name} must be > 0")
    if not params.R_crit > 0:
        out.append("R_crit must be > 0")
    if not 0 < params.lambda_mat <= 1:
        out.append("lambda_mat must lie in (0,1]")
    if not 0 < params.d_cfm < 1:
        out.append("d_cfm must lie in (0,1)")
    if not 0 <= params.p_realign <= 1:
        out.append("p_realign must lie in [0,1]")
    if params.realign_cooldown < 0:
        out.append("realign_cooldown must be >= 0")

    signs = {
        "beta_R": -1, "beta_IFI": -1, "eta_CA_S": 1, "eta_CA_g": -1,
        "eta_KA_rp": -1, "eta_KA_U": -1, "beta_G_TR": -1, "beta_G_E": 1, "beta_gini": -1,
    }
    for name, sign in signs.items():
        if getattr(params, name) * sign <= 0:
            out.append(f"{name} must be {'positive' if sign > 0 else 'negative'}")

    for comp, expected in zip(WELFARE_COMPONENTS, WELFARE_WEIGHTS):
        wv = getattr(params, f"w_{comp}")
        if np.sign(wv) != np.sign(expected):
            out.append(f"w_{comp} has the wrong sign")
        if not getattr(params, f"scale_{comp}") > 0:
            out.append(f"scale_{comp} must be > 0")
    return out


def validate(state=None, params: Params | None = None) -> list[str]:
    """All invariant violations of ``state`` and/or ``params``; empty means ok."""
    out = []
    if state is not None:
        out += validate_state(state)
    if params is not None:
        out += validate_params(params)
    return out

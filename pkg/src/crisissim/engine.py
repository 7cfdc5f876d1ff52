"""Quarter step, path simulation and the Monte Carlo ensemble.

Paths are simulated in vectorised batches: every state field holds one value
per path.  Since all randomness is counter-based (see ``stochastics``) and
every operation is element-wise, a path's trajectory does not depend on which
batch or worker computed it.

Within a quarter the order is fixed:

1. classify the regime from the start-of-quarter state
2. draw multipliers for that regime
3. apply scenario events (haircuts, rate relief, program flags)
4. real and fiscal block
5. monetary block (Taylor rule)
6. external block (CA, KA, reserves, official FX, parallel gap)
7. prices
8. debt, risk premium and effective rate
9. social block
10. welfare and the next regime

The social block reads only start-of-quarter values and its own outputs, so
it commutes with blocks 6-8; ``step(order=...)`` exists to test that.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from types import SimpleNamespace

import numpy as np

from . import nominal_external as nx
from . import real_fiscal as rf
from . import social as so
from .model_state import FLOAT_FIELDS, Params, StateVector, initial_state, regime_codes
from .scenario import QuarterPolicy, Scenario
from .stochastics import PathStreams, global_shock_step

log = logging.getLogger(__name__)

DEFAULT_HORIZON = 40
DEFAULT_PATHS = 300
SUMMARY_HORIZONS = (0, 16, 40)

BLOCK_ORDER = ("real", "monetary", "external", "prices", "debt", "social")

# Recorded per quarter, in addition to FLOAT_FIELDS.
DERIVED = ("B", "gap", "regime")
RECORDED = FLOAT_FIELDS + DERIVED


class EventError(RuntimeError):
    """Scenario events applied twice in the same quarter."""


def apply_events(state: StateVector, scenario: Scenario, t: int, params: Params | None = None):
    """Apply the scenario's discrete events of quarter ``t``.

    Haircuts scale debt by (1 - h); rate relief lowers the effective rate
    (floored at 0).  Program flags and devaluations are carried by the
    quarter's :class:`QuarterPolicy` and take effect in their blocks.
    Returns ``(state', fired)`` with ``fired`` a list of event labels.
    """
    if state.last_event_quarter == t:
        raise EventError(f"events of quarter {t} already applied")
    params = params or Params()
    policy = scenario.policy_at(t, params)
    b, r_eff = state.b, state.r_eff
    fired = []
    for ev in policy.debt_events:
        if ev.haircut:
            b = b * (1.0 - ev.haircut)
        if ev.rate_relief:
            r_eff = np.maximum(0.0, r_eff - ev.rate_relief)
        fired.append(f"{ev.flavor} haircut={ev.haircut:g} relief={ev.rate_relief:g}")
    if policy.devaluation:
        fired.append(f"devaluation {policy.devaluation:g}")
    if policy.ifi_start:
        fired.append("IFI start")
    if policy.lvt_start:
        fired.append("LVT start")
    if scenario.cfm is not None and t == scenario.cfm.start:
        fired.append("CFM start")
    return state.replace(b=b, r_eff=r_eff, last_event_quarter=t), fired


def _real(s, new, q, p):
    imp = q.policy.impulse
    new["tau"] = rf.revenue_ratio(q.gap, s.pi, s.Cred, p, q.policy.lvt_shift)
    pd_star = rf.primary_balance_target(s.t, q.regime, s.r_eff, s.ghat, s.b, p)
    new["pd"] = rf.observed_deficit(pd_star, imp, new["tau"], p)
    m = nx.monetary_impulse(s.i_pol, p)
    q.dlnY = rf.growth_update(imp, (q.mu[..., 0], q.mu[..., 1], q.mu[..., 2]), s.z, m, q.eps.eps_d)
    new["Y"] = s.Y * np.exp(q.dlnY)
    new["K_pub"] = rf.public_capital_update(s.K_pub, rf.investment_level(imp, p), s.Y, p.delta_p)
    dK = new["K_pub"] - s.K_pub
    new["Y_pot"] = s.Y_pot * np.exp(rf.potential_update(dK, s.Y, s.Gini, p))
    new["z"] = global_shock_step(s.z, q.eps.eps_z, p)
    q.gap_next = (new["Y"] - new["Y_pot"]) / new["Y_pot"]


def _monetary(s, new, q, p):
    new["i_pol"] = nx.taylor_rate(s.i_pol, s.pi, q.gap, p)


def _external(s, new, q, p):
    pol = q.policy
    B = s.S_par / s.S_off
    new["CA"] = nx.current_account(s.dlnS_par, q.gap, pol.impulse, q.eps.eps_ca, p)
    new["KA"] = nx.capital_account(s.rp, s.Unrest, B, pol.cfm_active, q.eps.eps_ka, p, pol.cfm_damping)
    new["R"] = nx.reserves_update(s.R, nx.BoPFlows(new["CA"], new["KA"]), pol.ifi_injection)
    new["S_off"], new["realigned"], new["cooldown"] = nx.official_fx_update(
        s.S_off, s.R, pol.fx, s.cooldown, q.u_realign, p, pol.devaluation
    )
    B_next = nx.gap_update(B, new["R"], s.rp, s.Unrest, s.Cred, q.eps.eps_B, p)
    new["S_par"] = B_next * new["S_off"]


def _prices(s, new, q, p):
    phi = nx.pass_through(new["R"], p)
    new["dlnS_par"] = np.log(new["S_par"] / s.S_par)
    new["pi"] = nx.inflation_update(s.pi, q.gap_next, new["dlnS_par"], phi, q.eps.eps_pi, p)
    new["pi_prev"] = s.pi


def _debt(s, new, q, p):
    ghat = np.where(q.bad_growth, np.nan, s.ghat)
    new["b"] = nx.debt_update(s.b, s.r_eff, ghat, new["pd"], new["S_off"] / s.S_off, p)
    B_next = new["S_par"] / new["S_off"]
    new["rp"] = nx.risk_premium_update(s.rp, new["b"], new["R"], B_next, s.Unrest, q.policy.ifi_rp_relief, p)
    new["r_eff"] = nx.effective_rate_update(s.r_eff, new["rp"], p)
    new["ghat"] = q.dlnY + new["pi"]


def _social(s, new, q, p):
    imp = q.policy.impulse
    new["E"] = so.employment_update(s.E, q.gap, s.r_eff, s.ghat, s.dlnw, q.eps.eps_E, p)
    new["w"], new["dlnw"] = so.wage_update(s.w, s.pi, s.E, p)
    new["Gini"] = so.gini_update(s.Gini, imp.dTR, new["E"], q.eps.eps_gini, p)
    new["Health"] = so.health_update(s.Health, s.E, imp.dTR, s.Gini, p)
    new["Unrest"] = so.unrest_update(s.Unrest, s.Gini, s.pi, imp.dGC + imp.dTR, p)
    events = so.CredEvents(
        ifi_start=q.policy.ifi_start,
        lvt_start=q.policy.lvt_start,
        restructuring=q.policy.restructuring,
        realigned=s.realigned,
        ifi_gain=q.policy.ifi_gain,
        lvt_gain=q.policy.lvt_gain,
    )
    new["Cred"] = so.credibility_update(s.Cred, events, p)


BLOCKS = {
    "real": _real,
    "monetary": _monetary,
    "external": _external,
    "prices": _prices,
    "debt": _debt,
    "social": _social,
}


@dataclass
class StepInfo:
    regime: np.ndarray
    mu: np.ndarray
    fired: list
    policy: QuarterPolicy
    bad_growth: np.ndarray


def step(state: StateVector, scenario: Scenario, params: Params, streams: PathStreams,
         order=BLOCK_ORDER):
    """Advance one quarter.  ``params`` must already include scenario overrides.

    Returns ``(state', info)``.
    """
    t = state.t
    with np.errstate(all="ignore"):
        gap = (state.Y - state.Y_pot) / state.Y_pot
    regime = regime_codes(state.R, state.S_par / state.S_off, gap, params)
    mu = streams.multipliers(regime, t, params)
    eps = streams.shocks(t, params)
    u = streams.realign_uniform(t)
    state, fired = apply_events(state, scenario, t, params)
    policy = scenario.policy_at(t, params)
    q = SimpleNamespace(
        gap=gap, regime=regime, mu=mu, eps=eps, u_realign=u, policy=policy,
        bad_growth=np.asarray(state.ghat) <= -1.0,
    )
    if sorted(order) != sorted(BLOCK_ORDER) or order[0] != "real":
        raise ValueError(f"invalid block order {order}")
    new: dict = {}
    with np.errstate(all="ignore"):
        for name in order:
            BLOCKS[name](state, new, q, params)
        nxt = state.replace(t=t + 1, **new)
        nxt = nxt.replace(
            regime=regime_codes(nxt.R, nxt.S_par / nxt.S_off, (nxt.Y - nxt.Y_pot) / nxt.Y_pot, params),
            W=so.welfare_index(nxt, params),
        )
    return nxt, StepInfo(regime, mu, fired, policy, q.bad_growth)


@dataclass
class BatchResult:
    """Trajectories of a batch of paths; arrays are ``(n_paths, T+1)``."""

    scenario: str
    path_index: np.ndarray
    horizon: int
    traj: dict
    mu: np.ndarray
    realigned: np.ndarray
    scenario_events: list
    abort_reason: list
    abort_quarter: np.ndarray
    Y0: float

    def path(self, i: int) -> "PathResult":
        events = list(self.scenario_events)
        events += [(int(t), "realignment") for t in np.flatnonzero(self.realigned[i])]
        events.sort()
        return PathResult(
            scenario=self.scenario,
            path_index=int(self.path_index[i]),
            trajectory={k: v[i].copy() for k, v in self.traj.items()},
            multipliers=self.mu[i].copy(),
            events=tuple(events),
            aborted=self.abort_reason[i],
            Y0=self.Y0,
        )

    def paths(self) -> list:
        return [self.path(i) for i in range(len(self.path_index))]


def summary_horizons(horizon: int) -> tuple[int, ...]:
    return tuple(sorted({0, horizon} | {h for h in SUMMARY_HORIZONS if h <= horizon}))


def summarise(traj: dict, t: int, Y0: float) -> dict:
    return {
        "GDP": 100.0 * float(traj["Y"][t]) / Y0,
        "b": float(traj["b"][t]),
        "W": float(traj["W"][t]),
        "R": float(traj["R"][t]),
        "Gini": float(traj["Gini"][t]),
    }


@dataclass(frozen=True, eq=False)
class PathResult:
    scenario: str
    path_index: int
    trajectory: dict
    multipliers: np.ndarray
    events: tuple
    aborted: str | None
    Y0: float = 100.0
    summary: dict = field(default=None, compare=False)

    def __post_init__(self):
        if self.summary is None:
            object.__setattr__(self, "summary", self.compute_summary())

    @property
    def horizon(self) -> int:
        return len(self.trajectory["Y"]) - 1

    def compute_summary(self) -> dict:
        return {h: summarise(self.trajectory, h, self.Y0) for h in summary_horizons(self.horizon)}

    def check(self) -> list[str]:
        out = []
        for name, arr in self.trajectory.items():
            if len(arr) != self.horizon + 1:
                out.append(f"{name}: length {len(arr)} != T+1")
        if self.aborted is None and self.summary != self.compute_summary():
            out.append("summary does not match trajectory")
        return out


def _record(traj, st: StateVector, t: int):
    for name in FLOAT_FIELDS:
        traj[name][:, t] = getattr(st, name)
    traj["B"][:, t] = st.S_par / st.S_off
    with np.errstate(all="ignore"):
        traj["gap"][:, t] = (st.Y - st.Y_pot) / st.Y_pot
    traj["regime"][:, t] = st.regime


def simulate_batch(scenario: Scenario, params: Params, master_seed: int, path_index,
                   horizon: int = DEFAULT_HORIZON) -> BatchResult:
    """Simulate the given path indices together."""
    path_index = np.asarray(path_index, dtype=np.int64).reshape(-1)
    n = len(path_index)
    p = scenario.effective_params(params)
    streams = PathStreams(master_seed, path_index)
    st = initial_state(p, n)
    traj = {name: np.empty((n, horizon + 1)) for name in RECORDED}
    mu = np.empty((n, horizon, 3))
    realigned = np.zeros((n, horizon), dtype=bool)
    alive = np.ones(n, dtype=bool)
    reason = [None] * n
    abort_q = np.full(n, -1, dtype=np.int64)
    scenario_events = []
    _record(traj, st, 0)
    for t in range(horizon):
        st, info = step(st, scenario, p, streams)
        scenario_events += [(t, e) for e in info.fired]
        mu[:, t] = info.mu
        realigned[:, t] = st.realigned
        bad = np.zeros(n, dtype=bool)
        for i in np.flatnonzero(info.bad_growth & alive):
            reason[i] = f"quarter {t}: nominal growth at or below -100%"
            bad[i] = True
        finite = np.ones(n, dtype=bool)
        for name in FLOAT_FIELDS:
            ok = np.isfinite(getattr(st, name))
            for i in np.flatnonzero(~ok & finite & alive & ~bad):
                reason[i] = f"quarter {t}: non-finite {name}"
            finite &= ok
        bad |= alive & ~finite
        if bad.any():
            abort_q[bad] = t
            alive &= ~bad
            log.info("%s: %d path(s) aborted in quarter %d", scenario.name, int(bad.sum()), t)
        if not alive.all():
            st = st.replace(**{name: np.where(alive, getattr(st, name), np.nan) for name in FLOAT_FIELDS})
        _record(traj, st, t + 1)
    return BatchResult(
        scenario=scenario.name,
        path_index=path_index,
        horizon=horizon,
        traj=traj,
        mu=mu,
        realigned=realigned,
        scenario_events=scenario_events,
        abort_reason=reason,
        abort_quarter=abort_q,
        Y0=p.Y0,
    )


def simulate_path(scenario: Scenario, params: Params, seedspec, horizon: int = DEFAULT_HORIZON) -> PathResult:
    """Single path; ``seedspec`` is a SeedSpec or ``(master_seed, path_index)``."""
    seed, idx = (seedspec.master_seed, seedspec.path_index) if hasattr(seedspec, "master_seed") else seedspec
    return simulate_batch(scenario, params, seed, [idx], horizon).path(0)


def concat_batches(batches: list) -> BatchResult:
    first = batches[0]
    if len(batches) == 1:
        return first
    return BatchResult(
        scenario=first.scenario,
        path_index=np.concatenate([b.path_index for b in batches]),
        horizon=first.horizon,
        traj={k: np.concatenate([b.traj[k] for b in batches]) for k in first.traj},
        mu=np.concatenate([b.mu for b in batches]),
        realigned=np.concatenate([b.realigned for b in batches]),
        scenario_events=first.scenario_events,
        abort_reason=[r for b in batches for r in b.abort_reason],
        abort_quarter=np.concatenate([b.abort_quarter for b in batches]),
        Y0=first.Y0,
    )


def _chunks(start: int, stop: int, size: int):
    return [np.arange(a, min(a + size, stop)) for a in range(start, stop, size)]


def run_batches(scenarios, params: Params, master_seed: int, n_paths: int = DEFAULT_PATHS,
                horizon: int = DEFAULT_HORIZON, workers: int = 1, chunk_size: int | None = None,
                first_path: int = 0) -> dict:
    """Ensembles of several scenarios, merged per scenario in path order.

    Work is split into (scenario, path chunk) tasks; ``workers > 1`` runs them
    in separate processes.  Output does not depend on ``workers`` or
    ``chunk_size``.
    """
    if n_paths < 1:
        raise ValueError("n_paths must be >= 1")
    scenarios = list(scenarios)
    chunk_size = chunk_size or n_paths
    tasks = [(sc, idx) for sc in scenarios for idx in _chunks(first_path, first_path + n_paths, chunk_size)]
    if workers == 1:
        results = [simulate_batch(sc, params, master_seed, idx, horizon) for sc, idx in tasks]
    else:
        from joblib import Parallel, delayed

        results = Parallel(n_jobs=workers)(
            delayed(simulate_batch)(sc, params, master_seed, idx, horizon) for sc, idx in tasks
        )
    merged = {}
    for sc in scenarios:
        parts = [r for (s, _), r in zip(tasks, results) if s is sc]
        merged[sc.name] = concat_batches(parts)
    return merged


def run_ensemble(scenario: Scenario, params: Params, master_seed: int, n_paths: int = DEFAULT_PATHS,
                 horizon: int = DEFAULT_HORIZON, workers: int = 1, chunk_size: int | None = None,
                 first_path: int = 0) -> list:
    """``n_paths`` independent paths ordered by path index."""
    batch = run_batches([scenario], params, master_seed, n_paths, horizon, workers, chunk_size, first_path)
    return batch[scenario.name].paths()


def deterministic_path(scenario: Scenario, params: Params, horizon: int = DEFAULT_HORIZON) -> PathResult:
    """Zero-shock path: every shock scale, multiplier noise and the realignment hazard set to zero."""
    return simulate_path(scenario, params.deterministic(), (0, 0), horizon)


def monetary_irf(params: Params, shock: float = 0.0025, horizon: int = 8,
                 scenario: Scenario | None = None) -> np.ndarray:
    """Log-output response to a sustained rise of the Taylor target.

    Deterministic model, shocked minus baseline, quarters 0..horizon.
    """
    scenario = scenario or Scenario("baseline")
    base = deterministic_path(scenario, params, horizon)
    hit = deterministic_path(scenario, params.replace(rate_shock=params.rate_shock + shock), horizon)
    return np.log(hit.trajectory["Y"]) - np.log(base.trajectory["Y"])

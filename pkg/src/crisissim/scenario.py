"""Policy strategies as data.

A scenario file uses the same section grammar as the parameter file::

    [scenario]
    name = Shock-6+Deval

    [impulse:cut]            ; any number of impulse blocks, summed per quarter
    instrument = GC          ; GC | GI | TR
    size = -0.015
    start = 0
    duration = 4             ; omit for a persistent impulse
    shape = constant         ; constant | ramp | oneoff

    [fx]
    regime = crawl           ; fixed | crawl
    crawl_annual = 0.15

    [devaluation]            ; or [devaluation:<tag>] for several
    quarter = 0
    size = 0.30

    [debt:psi]               ; any number of debt events
    quarter = 4
    haircut = 0.30
    rate_relief = 0.0
    flavor = PSI             ; PSI | OSI | MKT

    [ifi]                    ; start, duration, injection, rp_relief, cred_gain
    [lvt]                    ; start, d_tau_bar, cred_gain
    [cfm]                    ; start, duration, damping
    [monetary]               ; Taylor overrides: a_pi, a_g, smoothing
    [overrides]              ; any other parameter, by name

A scenario-set file lists scenario files relative to itself::

    [scenario_set]
    name = grid29
    files =
        grid29/Shock-6+Deval.cfg
        ...
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

from .config import ConfigError, coerce, params_from_parser, read_file, make_parser
from .model_state import INSTRUMENTS, Params, param_sections
from .nominal_external import FxRegime
from .real_fiscal import FiscalImpulse

SHAPES = ("constant", "ramp", "oneoff")
FLAVORS = ("PSI", "OSI", "MKT")
MONETARY_KEYS = ("a_pi", "a_g", "smoothing")


@dataclass(frozen=True)
class ImpulseBlock:
    instrument: str
    size: float
    start: int = 0
    duration: int | None = None
    shape: str = "constant"

    def value(self, t: int) -> float:
        k = t - self.start
        if k < 0:
            return 0.0
        if self.shape == "oneoff":
            return self.size if k == 0 else 0.0
        if self.duration is not None and k >= self.duration:
            return 0.0
        if self.shape == "ramp":
            return self.size * min(1.0, (k + 1) / self.duration)
        return self.size


@dataclass(frozen=True)
class Devaluation:
    quarter: int
    size: float


@dataclass(frozen=True)
class DebtEvent:
    quarter: int
    haircut: float = 0.0
    rate_relief: float = 0.0
    flavor: str = "PSI"


@dataclass(frozen=True)
class IfiProgram:
    start: int
    duration: int
    injection: float
    rp_relief: bool = True
    cred_gain: float | None = None

    def active(self, t: int) -> bool:
        return self.start <= t < self.start + self.duration


@dataclass(frozen=True)
class LvtReform:
    start: int
    d_tau_bar: float | None = None
    cred_gain: float | None = None


@dataclass(frozen=True)
class CfmPolicy:
    start: int
    duration: int
    damping: float | None = None

    def active(self, t: int) -> bool:
        return self.start <= t < self.start + self.duration


@dataclass(frozen=True)
class QuarterPolicy:
    """Everything the scenario dictates for one quarter."""

    impulse: FiscalImpulse
    fx: FxRegime
    devaluation: float
    debt_events: tuple[DebtEvent, ...]
    ifi_active: bool
    ifi_rp_relief: bool
    ifi_injection: float
    ifi_start: bool
    ifi_gain: float | None
    lvt_shift: float
    lvt_start: bool
    lvt_gain: float | None
    cfm_active: bool
    cfm_damping: float

    @property
    def restructuring(self) -> bool:
        return any(e.flavor in ("PSI", "OSI") for e in self.debt_events)


@dataclass(frozen=True)
class Scenario:
    name: str
    description: str = ""
    impulses: tuple[ImpulseBlock, ...] = ()
    fx: FxRegime = field(default_factory=FxRegime)
    devaluations: tuple[Devaluation, ...] = ()
    debt_events: tuple[DebtEvent, ...] = ()
    ifi: IfiProgram | None = None
    lvt: LvtReform | None = None
    cfm: CfmPolicy | None = None
    monetary: dict = field(default_factory=dict)
    overrides: dict = field(default_factory=dict)

    def replace(self, **changes) -> "Scenario":
        return dataclasses.replace(self, **changes)

    def effective_params(self, params: Params) -> Params:
        return params.replace(**self.overrides, **self.monetary)

    def impulse_at(self, t: int) -> FiscalImpulse:
        vals = dict.fromkeys(INSTRUMENTS, 0.0)
        for blk in self.impulses:
            vals[blk.instrument] += blk.value(t)
        return FiscalImpulse(dGC=vals["GC"], dGI=vals["GI"], dTR=vals["TR"])

    def policy_at(self, t: int, params: Params) -> QuarterPolicy:
        ifi, lvt, cfm = self.ifi, self.lvt, self.cfm
        ifi_on = ifi is not None and ifi.active(t)
        lvt_on = lvt is not None and t >= lvt.start
        cfm_on = cfm is not None and cfm.active(t)
        d_tau = params.d_tau_lvt if lvt is None or lvt.d_tau_bar is None else lvt.d_tau_bar
        damping = params.d_cfm if cfm is None or cfm.damping is None else cfm.damping
        deval = 1.0
        for d in self.devaluations:
            if d.quarter == t:
                deval *= 1.0 + d.size
        return QuarterPolicy(
            impulse=self.impulse_at(t),
            fx=self.fx,
            devaluation=deval - 1.0,
            debt_events=tuple(e for e in self.debt_events if e.quarter == t),
            ifi_active=ifi_on,
            ifi_rp_relief=ifi_on and ifi.rp_relief,
            ifi_injection=ifi.injection if ifi_on else 0.0,
            ifi_start=ifi is not None and t == ifi.start,
            ifi_gain=None if ifi is None else ifi.cred_gain,
            lvt_shift=d_tau if lvt_on else 0.0,
            lvt_start=lvt is not None and t == lvt.start,
            lvt_gain=None if lvt is None else lvt.cred_gain,
            cfm_active=cfm_on,
            cfm_damping=damping,
        )

    def validate(self, horizon: int) -> list[str]:
        out = []

        def quarter(q, what):
            if not 0 <= q < horizon:
                out.append(f"{what}: quarter {q} outside [0, {horizon})")

        for blk in self.impulses:
            quarter(blk.start, f"impulse {blk.instrument}")
            if blk.instrument not in INSTRUMENTS:
                out.append(f"unknown instrument {blk.instrument!r}")
            if blk.shape not in SHAPES:
                out.append(f"unknown impulse shape {blk.shape!r}")
            if blk.duration is not None and blk.duration <= 0:
                out.append("impulse duration must be > 0")
            if blk.shape == "ramp" and blk.duration is None:
                out.append("a ramp needs a duration")
        for t in range(horizon if not out else 0):
            try:
                self.impulse_at(t)
            except ValueError as exc:
                out.append(f"quarter {t}: {exc}")
                break
        for d in self.devaluations:
            quarter(d.quarter, "devaluation")
            if d.size <= -1:
                out.append("devaluation size must exceed -1")
        for e in self.debt_events:
            quarter(e.quarter, "debt event")
            if not 0 <= e.haircut < 1:
                out.append(f"haircut {e.haircut} outside [0, 1)")
            if e.flavor not in FLAVORS:
                out.append(f"unknown debt event flavor {e.flavor!r}")
        for name, prog in (("ifi", self.ifi), ("cfm", self.cfm)):
            if prog is not None:
                quarter(prog.start, name)
                if prog.duration <= 0:
                    out.append(f"{name} duration must be > 0")
        if self.cfm is not None and self.cfm.damping is not None and not 0 < self.cfm.damping < 1:
            out.append("cfm damping must lie in (0, 1)")
        if self.lvt is not None:
            quarter(self.lvt.start, "lvt")
        known = {n for names in param_sections().values() for n in names}
        for key in self.overrides:
            if key not in known:
                out.append(f"unknown override {key!r}")
        for key in self.monetary:
            if key not in MONETARY_KEYS:
                out.append(f"unknown monetary override {key!r}")
        return out


def _opt(sec, key, kind, default=None, where=""):
    if key not in sec:
        return default
    return coerce(sec[key], kind, f"{where} {key}")


def _check_keys(sec, allowed, where):
    extra = set(sec.keys()) - set(allowed)
    if extra:
        raise ConfigError(f"{where}: unknown key(s) {sorted(extra)}")


def scenario_from_parser(cp, source: str = "<scenario>") -> Scenario:
    if not cp.has_section("scenario") or "name" not in cp["scenario"]:
        raise ConfigError(f"{source}: missing [scenario] name")
    head = cp["scenario"]
    _check_keys(head, ("name", "description"), f"{source} [scenario]")
    impulses, devals, debts = [], [], []
    ifi = lvt = cfm = None
    fx = FxRegime()
    monetary, overrides = {}, {}
    for name in cp.sections():
        sec = cp[name]
        where = f"{source} [{name}]"
        kind = name.split(":", 1)[0]
        if kind == "scenario":
            continue
        if kind == "impulse":
            _check_keys(sec, ("instrument", "size", "start", "duration", "shape"), where)
            impulses.append(
                ImpulseBlock(
                    instrument=sec.get("instrument", "").strip(),
                    size=_opt(sec, "size", float, 0.0, where),
                    start=_opt(sec, "start", int, 0, where),
                    duration=_opt(sec, "duration", int, None, where),
                    shape=sec.get("shape", "constant").strip(),
                )
            )
        elif kind == "fx":
            _check_keys(sec, ("regime", "crawl_annual", "crawl_quarterly"), where)
            regime = sec.get("regime", "fixed").strip()
            if regime == "crawl":
                if "crawl_annual" in sec:
                    fx = FxRegime.crawl_from_annual(_opt(sec, "crawl_annual", float, where=where))
                else:
                    fx = FxRegime("crawl", _opt(sec, "crawl_quarterly", float, 0.0, where))
            else:
                try:
                    fx = FxRegime(regime)
                except ValueError as exc:
                    raise ConfigError(f"{where}: {exc}") from exc
        elif kind == "devaluation":
            _check_keys(sec, ("quarter", "size"), where)
            devals.append(Devaluation(_opt(sec, "quarter", int, 0, where), _opt(sec, "size", float, 0.0, where)))
        elif kind == "debt":
            _check_keys(sec, ("quarter", "haircut", "rate_relief", "flavor"), where)
            debts.append(
                DebtEvent(
                    quarter=_opt(sec, "quarter", int, 0, where),
                    haircut=_opt(sec, "haircut", float, 0.0, where),
                    rate_relief=_opt(sec, "rate_relief", float, 0.0, where),
                    flavor=sec.get("flavor", "PSI").strip().upper(),
                )
            )
        elif kind == "ifi":
            _check_keys(sec, ("start", "duration", "injection", "rp_relief", "cred_gain"), where)
            ifi = IfiProgram(
                start=_opt(sec, "start", int, 0, where),
                duration=_opt(sec, "duration", int, 1, where),
                injection=_opt(sec, "injection", float, 0.0, where),
                rp_relief=_opt(sec, "rp_relief", bool, True, where),
                cred_gain=_opt(sec, "cred_gain", float, None, where),
            )
        elif kind == "lvt":
            _check_keys(sec, ("start", "d_tau_bar", "cred_gain"), where)
            lvt = LvtReform(
                start=_opt(sec, "start", int, 0, where),
                d_tau_bar=_opt(sec, "d_tau_bar", float, None, where),
                cred_gain=_opt(sec, "cred_gain", float, None, where),
            )
        elif kind == "cfm":
            _check_keys(sec, ("start", "duration", "damping"), where)
            cfm = CfmPolicy(
                start=_opt(sec, "start", int, 0, where),
                duration=_opt(sec, "duration", int, 1, where),
                damping=_opt(sec, "damping", float, None, where),
            )
        elif kind == "monetary":
            _check_keys(sec, MONETARY_KEYS, where)
            monetary = {k: coerce(v, float, f"{where} {k}") for k, v in sec.items()}
        elif kind == "overrides":
            sub = make_parser()
            sections = param_sections()
            for key, raw in sec.items():
                owner = next((s for s, names in sections.items() if key in names), None)
                if owner is None:
                    raise ConfigError(f"{where}: unknown parameter {key!r}")
                if not sub.has_section(owner):
                    sub.add_section(owner)
                sub[owner][key] = raw
            base = params_from_parser(sub, where)
            overrides = {k: getattr(base, k) for k in sec.keys()}
        else:
            raise ConfigError(f"{source}: unknown section [{name}]")
    return Scenario(
        name=head["name"].strip(),
        description=head.get("description", "").strip(),
        impulses=tuple(impulses),
        fx=fx,
        devaluations=tuple(devals),
        debt_events=tuple(debts),
        ifi=ifi,
        lvt=lvt,
        cfm=cfm,
        monetary=monetary,
        overrides=overrides,
    )


def load_scenario(path, horizon: int | None = None) -> Scenario:
    sc = scenario_from_parser(read_file(path), str(path))
    if horizon is not None:
        problems = sc.validate(horizon)
        if problems:
            raise ConfigError(f"{path}: " + "; ".join(problems))
    return sc


def load_scenario_set(path, horizon: int | None = None) -> list[Scenario]:
    path = Path(path)
    cp = read_file(path)
    if not cp.has_section("scenario_set") or "files" not in cp["scenario_set"]:
        raise ConfigError(f"{path}: missing [scenario_set] files")
    files = [ln.strip() for ln in cp["scenario_set"]["files"].splitlines() if ln.strip()]
    if not files:
        raise ConfigError(f"{path}: empty scenario set")
    scenarios = [load_scenario(path.parent / f, horizon) for f in files]
    names = [s.name for s in scenarios]
    dupes = {n for n in names if names.count(n) > 1}
    if dupes:
        raise ConfigError(f"{path}: duplicate scenario names {sorted(dupes)}")
    return scenarios

"""Reproducible randomness for the Monte Carlo engine.

Every variate is a pure function of ``(master_seed, path_index, stream_label,
quarter, draw_index)``.  The coordinates are folded through the SplitMix64
finalizer (Steele, Lea & Flood 2014) into a 64-bit word, whose top 53 bits
give a uniform on the open unit interval.  Normal and Student-t variates are
obtained by inverting the CDF, so one uniform yields exactly one variate and
no family's sequence depends on how many draws another family consumed.

Because nothing is sequential, paths can be simulated in any order, in any
batch size, on any number of workers, with bit-identical results.

The hash, the label digest (8-byte BLAKE2b) and the fold order are part of
the reproducibility contract; changing any of them changes every result.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri, stdtrit

from .model_state import INSTRUMENTS, SHOCK_FAMILIES, Params

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_C1 = np.uint64(0xBF58476D1CE4E5B9)
_C2 = np.uint64(0x94D049BB133111EB)
_S30, _S27, _S31, _S11 = (np.uint64(s) for s in (30, 27, 31, 11))
_INV53 = 2.0 ** -53


def _mix64(x: np.ndarray) -> np.ndarray:
    with np.errstate(over="ignore"):
        x = (x ^ (x >> _S30)) * _C1
        x = (x ^ (x >> _S27)) * _C2
        return x ^ (x >> _S31)


def _u64(x) -> np.ndarray:
    arr = np.asarray(x)
    if arr.dtype.kind == "i" and np.any(arr < 0):
        raise ValueError("seed coordinates must be non-negative")
    return arr.astype(np.uint64)


def _add(a, b):
    with np.errstate(over="ignore"):
        return a + b


def _mul(a, b):
    with np.errstate(over="ignore"):
        return a * b


def label_key(label: str) -> int:
    return int.from_bytes(hashlib.blake2b(label.encode(), digest_size=8).digest(), "little")


@dataclass(frozen=True)
class SeedSpec:
    """Coordinates of one stream.  ``path_index`` may be an int or an int array."""

    master_seed: int
    path_index: object = 0
    stream_label: str = ""


class CounterStream:
    """Stateless stream of uniforms indexed by ``(counter, k)``."""

    def __init__(self, spec: SeedSpec):
        if not 0 <= int(spec.master_seed) < 2**64:
            raise ValueError("master_seed must fit in 64 unsigned bits")
        self.spec = spec
        h = _mix64(_add(np.atleast_1d(_u64(int(spec.master_seed))), _GOLDEN))
        h = _mix64(h ^ np.uint64(label_key(spec.stream_label)))
        path = _u64(spec.path_index)
        self.key = _mix64(_add(h, _mul(_add(path, np.uint64(1)), _GOLDEN)))
        if np.ndim(spec.path_index) == 0:
            self.key = self.key.reshape(())

    def bits(self, counter, k=0) -> np.ndarray:
        c = _u64(counter)
        x = _mix64(_add(self.key, _mul(_add(c, np.uint64(1)), _GOLDEN)))
        return _mix64(x ^ _mul(_add(_u64(k), np.uint64(1)), _C1))

    def uniform(self, counter, k=0) -> np.ndarray:
        """Uniform on (0, 1), never exactly 0 or 1."""
        return ((self.bits(counter, k) >> _S11).astype(np.float64) + 0.5) * _INV53


def student_t_draw(stream: CounterStream, dof: float, scale: float, counter, k=0):
    """Zero-mean Student-t variate times ``scale``; ``dof = inf`` gives a normal."""
    if not dof > 2:
        raise ValueError(f"Student-t dof must exceed 2, got {dof}")
    u = stream.uniform(counter, k)
    if scale == 0:
        return np.zeros_like(u)
    if math.isinf(dof):
        return scale * ndtri(u)
    return scale * stdtrit(dof, u)


def global_shock_step(z, eps_z, params: Params):
    return params.rho_z * z + eps_z


@dataclass(frozen=True)
class ShockDraws:
    eps_d: np.ndarray
    eps_pi: np.ndarray
    eps_ca: np.ndarray
    eps_ka: np.ndarray
    eps_B: np.ndarray
    eps_E: np.ndarray
    eps_gini: np.ndarray
    eps_z: np.ndarray

    def scaled(self, **factors) -> "ShockDraws":
        """Copy with selected families multiplied, e.g. ``scaled(eps_ka=0.5)``."""
        vals = {f: getattr(self, f) for f in self.__dataclass_fields__}
        for name, factor in factors.items():
            vals[name] = vals[name] * factor
        return ShockDraws(**vals)


class PathStreams:
    """All streams of a batch of paths under one master seed."""

    def __init__(self, master_seed: int, path_index):
        self.master_seed = int(master_seed)
        self.path_index = np.asarray(path_index)
        self._streams: dict[str, CounterStream] = {}

    def stream(self, label: str) -> CounterStream:
        s = self._streams.get(label)
        if s is None:
            s = self._streams[label] = CounterStream(SeedSpec(self.master_seed, self.path_index, label))
        return s

    def shocks(self, t: int, params: Params) -> ShockDraws:
        return ShockDraws(
            **{
                f"eps_{fam}": student_t_draw(
                    self.stream(f"eps_{fam}"),
                    getattr(params, f"dof_{fam}"),
                    getattr(params, f"sigma_{fam}"),
                    t,
                )
                for fam in SHOCK_FAMILIES
            }
        )

    def multipliers(self, regime, t: int, params: Params) -> np.ndarray:
        """Drawn multipliers, shape ``(..., 3)`` ordered GC, TR, GI."""
        counter = 0 if params.mult_per_path else t
        means = params.multiplier_table()[np.asarray(regime, dtype=int)]
        noise = np.stack(
            [
                student_t_draw(self.stream(f"mult_{ins}"), params.mult_dof, params.mult_noise_scale, counter)
                for ins in INSTRUMENTS
            ],
            axis=-1,
        )
        return np.maximum(0.0, means + noise)

    def realign_uniform(self, t: int) -> np.ndarray:
        return self.stream("realign").uniform(t)


def quarter_shocks(spec: SeedSpec, t: int, params: Params) -> ShockDraws:
    """Shock draws of quarter ``t`` for the path(s) in ``spec``."""
    return PathStreams(spec.master_seed, spec.path_index).shocks(t, params)


def draw_multipliers(regime, streams: PathStreams, params: Params, t: int = 0) -> dict:
    mu = streams.multipliers(regime, t, params)
    return {ins: mu[..., i] for i, ins in enumerate(INSTRUMENTS)}

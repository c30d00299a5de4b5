"""Log-periodic power-law models of log price.

All three variants are written in terms of the time to the critical point
``tau = tc - t`` (decimal years):

simple
    ``A + B tau^m [1 + C cos(omega ln tau + phi)]``
weierstrass
    ``A + B tau^m + tau^m sum_n C_n cos(n omega ln tau + phi_n)``
landau
    ``A + B tau^m / sqrt(1 + (tau/dt)^(2m))
    * [1 + C cos(omega ln tau + (domega / 2m) ln(1 + (tau/dt)^(2m)) + phi)]``

The phase enters as ``+phi`` and is only identifiable modulo 2 pi.  A
Weierstrass set with a single harmonic equals a simple set with
``C = C_1 / B`` and ``phi = phi_1`` whenever ``B != 0``.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass

import numpy as np

from .errors import ModelDomainError

__all__ = [
    "KINDS",
    "LandauParams",
    "Params",
    "SimpleParams",
    "WeierstrassParams",
    "eval_landau",
    "eval_simple",
    "eval_weierstrass",
    "evaluate",
    "params_from_dict",
    "params_from_json",
    "residuals",
    "simple_from_weierstrass",
]

KINDS = ("simple", "weierstrass", "landau")


@dataclass(frozen=True)
class SimpleParams:
    tc: float
    m: float
    omega: float
    phi: float
    A: float
    B: float
    C: float

    kind = "simple"

    def to_dict(self) -> dict:
        return {"kind": self.kind, **asdict(self)}


@dataclass(frozen=True)
class WeierstrassParams:
    tc: float
    m: float
    omega: float
    A: float
    B: float
    harmonics: tuple[tuple[float, float], ...]  # (C_n, phi_n), n = 1..N

    kind = "weierstrass"

    def __post_init__(self):
        harmonics = tuple((float(c), float(p)) for c, p in self.harmonics)
        if not harmonics:
            raise ValueError("a Weierstrass model needs at least one harmonic")
        object.__setattr__(self, "harmonics", harmonics)

    @property
    def C(self) -> float:
        """Total harmonic amplitude relative to the power-law amplitude."""
        total = sum(abs(c) for c, _ in self.harmonics)
        if total == 0.0:
            return 0.0
        return total / abs(self.B) if self.B != 0 else float("inf")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["harmonics"] = [list(h) for h in self.harmonics]
        return {"kind": self.kind, **d}


@dataclass(frozen=True)
class LandauParams:
    tc: float
    m: float
    omega: float
    phi: float
    A: float
    B: float
    C: float
    delta_t: float
    delta_omega: float

    kind = "landau"

    def to_dict(self) -> dict:
        return {"kind": self.kind, **asdict(self)}


Params = SimpleParams | WeierstrassParams | LandauParams
_BY_KIND = {cls.kind: cls for cls in (SimpleParams, WeierstrassParams, LandauParams)}


def params_from_dict(d: dict) -> Params:
    d = dict(d)
    kind = d.pop("kind", None)
    if kind is None:
        kind = "weierstrass" if "harmonics" in d else "landau" if "delta_t" in d else "simple"
    try:
        cls = _BY_KIND[kind]
    except KeyError:
        raise ValueError(f"unknown model kind {kind!r}") from None
    return cls(**d)


def params_from_json(text: str) -> Params:
    return params_from_dict(json.loads(text))


def _tau(tc: float, t) -> np.ndarray:
    tau = tc - np.asarray(t, dtype=float)
    if np.any(~(tau > 0)):
        raise ModelDomainError(f"model evaluated at t >= tc = {tc}")
    return tau


def _scalar_or_array(t, y):
    return float(y) if np.ndim(t) == 0 else y


def eval_simple(p: SimpleParams, t):
    tau = _tau(p.tc, t)
    ln_tau = np.log(tau)
    y = p.A + p.B * tau**p.m * (1.0 + p.C * np.cos(p.omega * ln_tau + p.phi))
    return _scalar_or_array(t, y)


def eval_weierstrass(p: WeierstrassParams, t):
    tau = _tau(p.tc, t)
    ln_tau = np.log(tau)
    f = tau**p.m
    osc = np.zeros_like(f)
    for n, (c, phi) in enumerate(p.harmonics, start=1):
        osc = osc + c * np.cos(n * p.omega * ln_tau + phi)
    y = p.A + p.B * f + f * osc
    return _scalar_or_array(t, y)


def eval_landau(p: LandauParams, t):
    if not p.delta_t > 0:
        raise ValueError("delta_t must be positive")
    tau = _tau(p.tc, t)
    ln_tau = np.log(tau)
    # log1p keeps the tau << delta_t limit exact
    crossover = np.log1p((tau / p.delta_t) ** (2.0 * p.m))
    envelope = p.B * tau**p.m * np.exp(-0.5 * crossover)
    phase = p.omega * ln_tau + p.delta_omega / (2.0 * p.m) * crossover + p.phi
    y = p.A + envelope * (1.0 + p.C * np.cos(phase))
    return _scalar_or_array(t, y)


_EVAL = {"simple": eval_simple, "weierstrass": eval_weierstrass, "landau": eval_landau}


def evaluate(p: Params, t):
    """Evaluate any parameter variant at time(s) ``t``."""
    return _EVAL[p.kind](p, t)


def residuals(p: Params, t, y) -> np.ndarray:
    """Observed minus modelled log price, in data order."""
    return np.asarray(y, dtype=float) - np.asarray(evaluate(p, np.asarray(t, dtype=float)))


def simple_from_weierstrass(p: WeierstrassParams) -> SimpleParams:
    """Single-harmonic Weierstrass set rewritten as a simple set."""
    if len(p.harmonics) != 1:
        raise ValueError("only single-harmonic sets map onto the simple model")
    if p.B == 0:
        raise ValueError("B = 0 has no simple-model equivalent")
    c1, phi1 = p.harmonics[0]
    return SimpleParams(p.tc, p.m, p.omega, phi1, p.A, p.B, c1 / p.B)

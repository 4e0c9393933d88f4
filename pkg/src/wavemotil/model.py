"""Model parameters and motility laws for the density-suppressed motility system.

The system couples a cell density u and a chemical concentration v through

    u_t = (gamma(v) u)_xx + u (a - b u),
    v_t = v_xx + u - v,

where the motility gamma is a positive, strictly decreasing function of v.
Three closed-form motility families are supported; each returns gamma and its
first two derivatives exactly, which downstream certificate computations rely
on.  Arbitrary user callables are deliberately not accepted.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

__all__ = [
    "PowerMotility",
    "ExponentialMotility",
    "SigmoidMotility",
    "MotilityFamily",
    "ModelParams",
    "HypothesisReport",
    "motility_eval",
    "validate_h0",
]


def _as_checked_array(v):
    arr = np.asarray(v, dtype=float)
    if np.any(arr < 0.0):
        raise ValueError("motility is only defined for v >= 0")
    return arr


def _maybe_scalar(scalar_input: bool, *arrays):
    if scalar_input:
        return tuple(float(a) for a in arrays)
    return arrays


@dataclass(frozen=True)
class PowerMotility:
    """gamma(v) = (1 + v)^(-m) with m > 0.

    Bounds used throughout: 0 < gamma <= 1, -m < gamma' < 0 and
    0 < gamma'' <= m (m + 1) on v >= 0.
    """

    m: float

    def __post_init__(self):
        if not self.m > 0:
            raise ValueError("power exponent m must be positive")

    def eval(self, v):
        arr = _as_checked_array(v)
        base = 1.0 + arr
        g = base ** (-self.m)
        gp = -self.m * base ** (-(self.m + 1.0))
        gpp = self.m * (self.m + 1.0) * base ** (-(self.m + 2.0))
        return _maybe_scalar(np.isscalar(v), g, gp, gpp)


@dataclass(frozen=True)
class ExponentialMotility:
    """gamma(v) = exp(-chi v) with chi > 0."""

    chi: float

    def __post_init__(self):
        if not self.chi > 0:
            raise ValueError("exponential rate chi must be positive")

    def eval(self, v):
        arr = _as_checked_array(v)
        g = np.exp(-self.chi * arr)
        gp = -self.chi * g
        gpp = self.chi**2 * g
        return _maybe_scalar(np.isscalar(v), g, gp, gpp)


@dataclass(frozen=True)
class SigmoidMotility:
    """gamma(v) = 1 - (v - v0) / sqrt(eps + (v - v0)^2) with eps > 0.

    A smoothed switch: gamma stays near 2 well below v0, near 0 well above
    it, and changes convexity at v = v0.
    """

    eps: float = 0.1
    v0: float = 1.0

    def __post_init__(self):
        if not self.eps > 0:
            raise ValueError("smoothing parameter eps must be positive")

    def eval(self, v):
        arr = _as_checked_array(v)
        w = arr - self.v0
        s = np.sqrt(self.eps + w**2)
        g = 1.0 - w / s
        gp = -self.eps / s**3
        gpp = 3.0 * self.eps * w / s**5
        return _maybe_scalar(np.isscalar(v), g, gp, gpp)


MotilityFamily = Union[PowerMotility, ExponentialMotility, SigmoidMotility]


@dataclass(frozen=True)
class ModelParams:
    """Reaction rates and motility law.

    a is the intrinsic growth rate, b the intraspecific competition rate;
    both must be positive.  The coexistence state of the reaction part is
    (u, v) = (a/b, a/b).
    """

    a: float
    b: float
    motility: MotilityFamily

    def __post_init__(self):
        if not (self.a > 0 and self.b > 0):
            raise ValueError("both rates a and b must be positive")

    @property
    def equilibrium(self) -> float:
        return self.a / self.b


def motility_eval(family, v):
    """Evaluate (gamma, gamma', gamma'') at v >= 0.

    Accepts scalars or arrays; rejects any negative v.  Any object exposing
    an ``eval(v)`` triple works, which keeps validation reusable, but the
    supported families are exactly the three closed-form ones above.
    """
    return family.eval(v)


@dataclass(frozen=True)
class HypothesisReport:
    """Outcome of sampling the structural conditions on a motility law."""

    ok: bool
    v_max: float
    n_samples: int
    min_gamma: float
    max_dgamma: float
    gamma_at_vmax: float
    first_violation: float | None


def validate_h0(family, v_max: float, n_samples: int = 10_000) -> HypothesisReport:
    """Check gamma > 0 and gamma' < 0 on a uniform sample of [0, v_max].

    The limiting condition gamma -> 0 as v -> infinity cannot be verified by
    sampling; the report only records gamma at v_max.  Returns a report with
    the first violating sample when either sign condition fails.
    """
    if not v_max > 0:
        raise ValueError("v_max must be positive")
    vs = np.linspace(0.0, v_max, n_samples)
    g, gp, _ = motility_eval(family, vs)
    g = np.asarray(g, dtype=float)
    gp = np.asarray(gp, dtype=float)
    bad = (g <= 0.0) | (gp >= 0.0)
    if np.any(bad):
        first = float(vs[int(np.argmax(bad))])
        ok = False
    else:
        first = None
        ok = True
    return HypothesisReport(
        ok=ok,
        v_max=float(v_max),
        n_samples=int(n_samples),
        min_gamma=float(np.min(g)),
        max_dgamma=float(np.max(gp)),
        gamma_at_vmax=float(np.asarray(motility_eval(family, v_max)[0])),
        first_violation=first,
    )

"""Lower-order term families W(s) = s^2/2 + N(s) and their hypothesis checks.

After the rescaling that fixes the quadratic coefficient (m^2 = 1), a family
is eligible for the charge-constrained solver when

  W1: W(s) >= 0 for s >= 0,
  W2: W(0) = W'(0) = 0 and W''(0) = 1,
  W3: inf_{s>0} W(s)/(s^2/2) < 1   (equivalently N(s0) < 0 for some s0 > 0).

All families are extended evenly to s < 0 (W(-s) = W(s)).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

POLY_DOUBLE_ZERO = "poly_double_zero"
POWER_DEFOCUS = "power_defocus"
DOUBLE_WELL = "double_well"
QUADRATIC = "quadratic"

FAMILIES = (POLY_DOUBLE_ZERO, POWER_DEFOCUS, DOUBLE_WELL, QUADRATIC)


@dataclass
class PotentialSpec:
    """A W-family instance.

    family: one of FAMILIES.  parameters: family-specific (only power_defocus
    uses one, the exponent p).  s0: a point with N(s0) < 0 where the family
    admits one (used to seed torus trials).
    """

    family: str = POLY_DOUBLE_ZERO
    parameters: dict = field(default_factory=dict)
    s0: float = 1.0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown potential family: {self.family!r}")
        if self.family == POWER_DEFOCUS:
            p = float(self.parameters.get("p", 4.0))
            if p <= 2.0:
                raise ValueError(f"power_defocus needs p > 2, got {p}")
            self.parameters = {"p": p}
        else:
            self.parameters = {}

    # -- evaluators (vectorized; even in s) --------------------------------

    def w(self, s):
        s = np.abs(np.asarray(s, dtype=float))
        if self.family == POLY_DOUBLE_ZERO:
            return 0.5 * s ** 2 * (1.0 - s) ** 2
        if self.family == POWER_DEFOCUS:
            p = self.parameters["p"]
            return 0.5 * s ** 2 - s ** p / p
        if self.family == DOUBLE_WELL:
            return (1.0 - s ** 2) ** 2
        return 0.5 * s ** 2

    def wprime(self, s):
        s_in = np.asarray(s, dtype=float)
        sign = np.sign(s_in)
        s = np.abs(s_in)
        if self.family == POLY_DOUBLE_ZERO:
            d = s - 3.0 * s ** 2 + 2.0 * s ** 3
        elif self.family == POWER_DEFOCUS:
            d = s - s ** (self.parameters["p"] - 1.0)
        elif self.family == DOUBLE_WELL:
            d = -4.0 * s * (1.0 - s ** 2)
        else:
            d = s
        return sign * d

    def wsecond(self, s):
        s = np.abs(np.asarray(s, dtype=float))
        if self.family == POLY_DOUBLE_ZERO:
            return 1.0 - 6.0 * s + 6.0 * s ** 2
        if self.family == POWER_DEFOCUS:
            p = self.parameters["p"]
            return 1.0 - (p - 1.0) * s ** (p - 2.0)
        if self.family == DOUBLE_WELL:
            return -4.0 + 12.0 * s ** 2
        return np.ones_like(s)

    def n(self, s):
        s = np.asarray(s, dtype=float)
        return self.w(s) - 0.5 * s ** 2

    def id_string(self) -> str:
        if self.family == POWER_DEFOCUS:
            return f"{self.family}:p={self.parameters['p']!r}"
        return self.family

    @staticmethod
    def from_id(ident: str) -> "PotentialSpec":
        if ident.startswith(POWER_DEFOCUS):
            p = 4.0
            if ":" in ident:
                _, params = ident.split(":", 1)
                p = float(params.split("=", 1)[1])
            return PotentialSpec(POWER_DEFOCUS, {"p": p})
        return PotentialSpec(ident)


def eval_potential(spec: PotentialSpec, s):
    """Return the consistent triple (W(s), W'(s), N(s)) with N = W - s^2/2."""
    return spec.w(s), spec.wprime(s), spec.n(s)


@dataclass
class ValidationReport:
    family: str
    s_max: float
    n_samples: int
    w1_pass: bool
    w1_min: float
    w2_pass: bool
    w2_value_at_zero: float
    w2_second_deriv: float
    w3_pass: bool
    w3_ratio_min: float
    w3_argmin: float
    growth_bounded: bool
    growth_ratio_end: float
    eligible: bool

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def validate_hypotheses(spec: PotentialSpec, s_max: float = 2.0,
                        n_samples: int = 2001) -> ValidationReport:
    """Sampling-based check of W1-W3 and of the sextic growth cap on W'.

    A report, not a gate: ineligible families stay usable wherever the
    artifact explicitly calls for them (demonstrations, comparisons).
    """
    if s_max <= 0:
        raise ValueError("s_max must be positive")
    if n_samples < 100:
        raise ValueError("n_samples must be at least 100")

    s = np.linspace(0.0, s_max, n_samples)
    w = spec.w(s)

    w1_min = float(w.min())
    w1_pass = w1_min >= -1e-12

    w0 = float(spec.w(0.0))
    # the even extension leaves a one-sided W''' at 0, so the centered second
    # difference is only O(h) accurate: h must be small to hit the 1e-6 gate
    h = 1e-7
    w2_second = float((spec.w(h) - 2.0 * w0 + spec.w(-h)) / h ** 2)
    w2_pass = (abs(w0) <= 1e-12 and abs(float(spec.wprime(0.0))) <= 1e-12
               and abs(w2_second - 1.0) <= 1e-6)

    s_pos = s[1:]
    ratio = w[1:] / (0.5 * s_pos ** 2)
    k = int(np.argmin(ratio))
    w3_ratio_min = float(ratio[k])
    w3_argmin = float(s_pos[k])
    w3_pass = w3_ratio_min < 1.0 - 1e-12

    # growth per the sextic cap: W'(s)/s^5 must stay bounded as s grows
    tail = s_pos[s_pos >= 0.5 * s_max]
    gr = np.abs(spec.wprime(tail)) / tail ** 5
    growth_ratio_end = float(gr[-1])
    growth_bounded = bool(gr[-1] <= 4.0 * max(gr[0], 1e-300) + 1e-12)

    eligible = w1_pass and w2_pass and w3_pass
    return ValidationReport(
        family=spec.family, s_max=float(s_max), n_samples=int(n_samples),
        w1_pass=w1_pass, w1_min=w1_min,
        w2_pass=w2_pass, w2_value_at_zero=w0, w2_second_deriv=w2_second,
        w3_pass=w3_pass, w3_ratio_min=w3_ratio_min, w3_argmin=w3_argmin,
        growth_bounded=growth_bounded, growth_ratio_end=growth_ratio_end,
        eligible=eligible,
    )

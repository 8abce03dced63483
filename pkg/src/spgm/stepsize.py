"""Stepsize policies and the inner tolerance schedule.

Every emitted stepsize is clamped into (0, 1/(4 L_f)], the range under which
the contraction recurrence holds. The variable policy is indexed so that the
first outer iteration (k = 0) already gets a finite value: mu_k = 2 mu0/(k+1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable


@dataclass(frozen=True)
class StepsizePolicy:
    """One of three schedules: constant 2 mu0/K, variable 2 mu0/k, or mixed
    (constant mu0/(4 L_f) for k < switch, then the variable tail 2 mu0/k)."""

    variant: str          # "constant" | "variable" | "mixed"
    mu0: float
    cap: float            # 1 / (4 L_f)
    horizon: int | None = None   # K, constant only
    switch: int | None = None    # T1, mixed only

    def __post_init__(self):
        if self.mu0 <= 0 or self.cap <= 0:
            raise ValueError("mu0 and cap must be positive")
        if self.variant == "constant" and (self.horizon is None or self.horizon < 1):
            raise ValueError("constant policy needs a positive horizon K")
        if self.variant == "mixed" and (self.switch is None or self.switch < 1):
            raise ValueError("mixed policy needs a positive switch point T1")
        if self.variant not in ("constant", "variable", "mixed"):
            raise ValueError(f"unknown policy variant {self.variant!r}")

    @classmethod
    def constant(cls, mu0: float, horizon: int, lipschitz: float) -> "StepsizePolicy":
        return cls("constant", mu0, cap=1.0 / (4.0 * lipschitz), horizon=horizon)

    @classmethod
    def variable(cls, mu0: float, lipschitz: float) -> "StepsizePolicy":
        return cls("variable", mu0, cap=1.0 / (4.0 * lipschitz))

    @classmethod
    def mixed(cls, mu0: float, switch: int, lipschitz: float) -> "StepsizePolicy":
        return cls("mixed", mu0, cap=1.0 / (4.0 * lipschitz), switch=switch)

    def step(self, k: int) -> float:
        """Stepsize for outer iteration k (0-based)."""
        if k < 0:
            raise ValueError("iteration index must be nonnegative")
        if self.variant == "constant":
            value = 2.0 * self.mu0 / self.horizon
        elif self.variant == "variable":
            value = 2.0 * self.mu0 / (k + 1)
        else:
            if k < self.switch:
                value = self.mu0 * self.cap   # mu0 / (4 L_f)
            else:
                value = 2.0 * self.mu0 / max(k, 1)
        return min(value, self.cap)


@dataclass(frozen=True)
class ToleranceSchedule:
    """Inner prox accuracy delta_k as a function of (mu_k, N).

    "theorem" uses mu^{3/2} / sqrt(N); "capped" additionally clips it at
    `cap` (the theorem value is very loose in the early iterations, which
    admits crude inner solutions); "exact" pins 1e-12 for recurrence
    experiments that need a near-exact prox; "custom" delegates to `rule`.
    """

    mode: str = "theorem"
    rule: Callable[[float, int], float] | None = None
    cap: float = 1e-6

    EXACT_DELTA = 1e-12

    def delta(self, mu: float, batch_size: int) -> float:
        if mu <= 0 or batch_size < 1:
            raise ValueError("need mu > 0 and batch_size >= 1")
        if self.mode == "theorem":
            return mu ** 1.5 / math.sqrt(batch_size)
        if self.mode == "capped":
            return min(mu ** 1.5 / math.sqrt(batch_size), self.cap)
        if self.mode == "exact":
            return self.EXACT_DELTA
        if self.mode == "custom":
            if self.rule is None:
                raise ValueError("custom schedule needs a rule")
            value = float(self.rule(mu, batch_size))
            if value <= 0:
                raise ValueError("tolerance rule must return a positive value")
            return value
        raise ValueError(f"unknown tolerance mode {self.mode!r}")


def mixed_switch_point(lipschitz: float, sigma: float, mu0: float,
                       eps: float, r0_sq: float) -> int:
    """Switch iteration ceil((4 L_f / (mu0 sigma)) log(2 r0^2 / eps)).

    r0_sq estimates ||w^0 - w*||^2. Requires strong convexity; sigma = 0 has
    no finite switch point.
    """
    if sigma <= 0:
        raise ValueError("mixed policy needs strong convexity (sigma > 0)")
    if min(lipschitz, mu0, eps, r0_sq) <= 0:
        raise ValueError("all arguments must be positive")
    return math.ceil((4.0 * lipschitz / (mu0 * sigma)) * math.log(2.0 * r0_sq / eps))

"""Advantage estimation: exact enumeration or Monte-Carlo with Wilson CIs.

A *game arm* is a weighted mixture of Bernoulli branches.  Exact mode sums
weight x success-probability over every branch with Fraction arithmetic
(so an advantage of zero is literally zero); sampling mode draws a branch,
then a Bernoulli outcome, per trial.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Optional

from .errors import EnumerationCapError
from .rng import Stream

ENUM_CAP_DEFAULT = 1 << 20
_Z95 = 1.959963984540054


def wilson_halfwidth(successes: int, trials: int, z: float = _Z95) -> float:
    """Half-width of the 95% Wilson score interval around the point estimate."""
    if trials <= 0:
        raise ValueError("trials must be positive")
    p = successes / trials
    denom = 1.0 + z * z / trials
    return (z / denom) * math.sqrt(p * (1.0 - p) / trials + z * z / (4.0 * trials * trials))


@dataclass(frozen=True)
class AdvantageEstimate:
    """Real-vs-ideal success probabilities from one security-game run."""

    p_real: float
    p_ideal: float
    advantage: float
    ci_halfwidth: float
    trials: int
    exact: bool
    p_real_exact: Optional[Fraction] = field(default=None, repr=False)
    p_ideal_exact: Optional[Fraction] = field(default=None, repr=False)

    def __post_init__(self):
        for p in (self.p_real, self.p_ideal):
            if not -1e-12 <= p <= 1 + 1e-12:
                raise ValueError(f"probability {p} outside [0, 1]")
        if self.exact and self.ci_halfwidth != 0.0:
            raise ValueError("exact estimates carry no confidence interval")

    @property
    def advantage_exact(self) -> Optional[Fraction]:
        if self.p_real_exact is None or self.p_ideal_exact is None:
            return None
        return abs(self.p_real_exact - self.p_ideal_exact)

    def to_dict(self) -> dict:
        return {
            "p_real": float(self.p_real),
            "p_ideal": float(self.p_ideal),
            "advantage": float(self.advantage),
            "ci": float(self.ci_halfwidth),
            "trials": int(self.trials),
            "exact": bool(self.exact),
        }


class GameArm:
    """One arm of a game: exact branch enumeration plus a per-trial sampler.

    `branches()` yields (weight, success_probability) pairs as Fractions;
    `sample_probability(rng)` returns the success probability of one
    randomly realized branch (a float), from which a Bernoulli outcome is
    drawn.  Either half may be missing when a role only supports one mode.
    """

    def __init__(
        self,
        branches: Optional[Callable[[], Iterable[tuple[Fraction, Fraction]]]] = None,
        sample_probability: Optional[Callable[[Stream], float]] = None,
    ):
        self._branches = branches
        self._sampler = sample_probability

    def exact_probability(self, cap: int = ENUM_CAP_DEFAULT) -> Fraction:
        if self._branches is None:
            raise EnumerationCapError("this arm does not support exact enumeration")
        total = Fraction(0)
        weight_seen = Fraction(0)
        count = 0
        for weight, p in self._branches():
            count += 1
            if count > cap:
                raise EnumerationCapError(f"enumeration exceeded the cap of {cap} branches")
            weight = Fraction(weight)
            p = Fraction(p)
            total += weight * p
            weight_seen += weight
        if weight_seen != 1:
            raise EnumerationCapError(f"branch weights sum to {weight_seen}, expected 1")
        return total

    def sample(self, rng: Stream) -> int:
        if self._sampler is None:
            raise EnumerationCapError("this arm does not support sampling")
        p = self._sampler(rng)
        return 1 if rng.child("bernoulli").bernoulli(p) else 0


def estimate_probability(
    arm: GameArm,
    *,
    exact: bool,
    trials: int,
    rng: Stream,
    cap: int = ENUM_CAP_DEFAULT,
) -> tuple[float, float, Optional[Fraction], int]:
    """(point estimate, ci halfwidth, exact fraction or None, trials used)."""
    if exact:
        p = arm.exact_probability(cap)
        return float(p), 0.0, p, 0
    hits = sum(arm.sample(rng.child(f"t{t}")) for t in range(trials))
    return hits / trials, wilson_halfwidth(hits, trials), None, trials


def estimate(
    real: GameArm,
    ideal: Optional[GameArm] = None,
    *,
    exact: bool,
    trials: int = 1000,
    rng: Stream,
    cap: int = ENUM_CAP_DEFAULT,
) -> AdvantageEstimate:
    """Run a one- or two-arm game and package the result.

    With a single arm the ideal probability is fixed at 1/2 (guessing
    baseline), which is the convention for hidden-bit games.
    """
    p_r, ci_r, fr_r, used = estimate_probability(
        real, exact=exact, trials=trials, rng=rng.child("real"), cap=cap
    )
    if ideal is None:
        p_i, ci_i, fr_i = 0.5, 0.0, Fraction(1, 2)
        if not exact:
            fr_i = Fraction(1, 2)
    else:
        p_i, ci_i, fr_i, _ = estimate_probability(
            ideal, exact=exact, trials=trials, rng=rng.child("ideal"), cap=cap
        )
    if exact:
        adv = abs(fr_r - fr_i)
        return AdvantageEstimate(
            p_real=float(fr_r),
            p_ideal=float(fr_i),
            advantage=float(adv),
            ci_halfwidth=0.0,
            trials=0,
            exact=True,
            p_real_exact=fr_r,
            p_ideal_exact=fr_i,
        )
    return AdvantageEstimate(
        p_real=p_r,
        p_ideal=p_i,
        advantage=abs(p_r - p_i),
        ci_halfwidth=ci_r + ci_i,
        trials=used,
        exact=False,
    )

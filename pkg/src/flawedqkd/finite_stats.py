"""Concentration arithmetic for converting observed counts into bounds on
expected counts.

The deviation function applies to any martingale with differences bounded
by 1, which covers the per-pulse detection processes of the protocol under
coherent attacks.  The asymptotic key-rate pipeline does not consume these
bounds; the module exists so finite-size extensions can be layered on
without touching the estimators.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class AzumaBudget:
    """Trial count and the two tail probabilities of a two-sided bound."""

    n_trials: int
    epsilon: float
    epsilon_hat: float

    def __post_init__(self) -> None:
        if self.n_trials < 0:
            raise ValueError(f"n_trials must be nonnegative, got {self.n_trials}")
        if not 0.0 < self.epsilon <= 1.0:
            raise ValueError(f"epsilon must lie in (0, 1], got {self.epsilon}")
        if not 0.0 < self.epsilon_hat <= 1.0:
            raise ValueError(f"epsilon_hat must lie in (0, 1], got {self.epsilon_hat}")


def azuma_deviation(n: float, eps: float) -> float:
    """Deviation sqrt(2 n ln(1/eps)) exceeded with probability at most eps."""
    if n < 0:
        raise ValueError(f"n must be nonnegative, got {n}")
    if not 0.0 < eps <= 1.0:
        raise ValueError(f"eps must lie in (0, 1], got {eps}")
    return math.sqrt(2.0 * n * math.log(1.0 / eps))


def count_interval(observed: float, budget: AzumaBudget) -> tuple[float, float]:
    """Two-sided bound on the expected count behind an observed count.

    Holds except with probability epsilon + epsilon_hat; the interval is
    clipped to the physical range [0, n_trials].
    """
    n = budget.n_trials
    if not 0.0 <= observed <= n:
        raise ValueError(f"observed must lie in [0, {n}], got {observed}")
    low = observed - azuma_deviation(n, budget.epsilon_hat)
    high = observed + azuma_deviation(n, budget.epsilon)
    return max(low, 0.0), min(high, float(n))

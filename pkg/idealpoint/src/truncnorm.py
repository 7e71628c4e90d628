"""Unit-variance normal draws truncated at zero.

Draws within five standard deviations of the boundary use the inverse CDF;
deeper tails use exponential rejection with the optimal rate.
"""

from __future__ import annotations

import math
from typing import Literal

import numpy as np
from scipy.special import ndtr, ndtri

from idealpoint.src.errors import DomainError


Side = Literal["positive", "nonpositive"]

TAIL_THRESHOLD = 5.0


def _standard_tail(lower: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Draw x ~ N(0, 1) conditioned on x > lower, element-wise."""
    lower = np.asarray(lower, dtype=float)
    out = np.empty_like(lower)

    bulk = lower <= TAIL_THRESHOLD
    if bulk.any():
        u = 1.0 - rng.random(int(bulk.sum()))
        # Survival-function inversion: Phi(-x) = u * Phi(-lower).
        tail_mass = ndtr(-lower[bulk])
        x = -ndtri(u * tail_mass)
        out[bulk] = np.maximum(x, lower[bulk])

    pending = np.flatnonzero(~bulk)
    while pending.size:
        a = lower[pending]
        rate = (a + np.sqrt(a * a + 4.0)) / 2.0
        proposal = a + rng.exponential(1.0 / rate)
        accept = rng.random(pending.size) <= np.exp(-0.5 * (proposal - rate) ** 2)
        out[pending[accept]] = proposal[accept]
        pending = pending[~accept]
    return out


def sample_truncated_normal_array(
    means: np.ndarray,
    positive: np.ndarray,
    rng: np.random.Generator,
) -> np.ndarray:
    """Vectorised draws: entry k lies in (0, inf) when positive[k], else in (-inf, 0]."""
    means = np.asarray(means, dtype=float)
    positive = np.asarray(positive, dtype=bool)
    if not np.isfinite(means).all():
        raise DomainError("Truncated normal means must be finite")
    sign = np.where(positive, 1.0, -1.0)
    x = _standard_tail(-sign * means, rng)
    draws = means + sign * x
    draws = np.where(positive, np.maximum(draws, np.nextafter(0.0, 1.0)), np.minimum(draws, 0.0))
    return draws


def sample_truncated_normal(mean: float, side: Side, rng: np.random.Generator) -> float:
    if not math.isfinite(mean):
        raise DomainError(f"Truncated normal mean must be finite (got {mean})")
    if side not in ("positive", "nonpositive"):
        raise DomainError(f"Unknown truncation side: {side}")
    draw = sample_truncated_normal_array(np.array([mean]), np.array([side == "positive"]), rng)
    return float(draw[0])

"""Tests for zero-truncated normal draws."""

from __future__ import annotations

import math

import numpy as np
import pytest
from scipy import integrate, stats

from idealpoint.src.errors import DomainError
from idealpoint.src.truncnorm import sample_truncated_normal, sample_truncated_normal_array


SAMPLES = 40_000


def _reference_cdf(mean: float, positive: bool):
    if positive:
        return stats.truncnorm(a=-mean, b=np.inf, loc=mean, scale=1.0).cdf
    return stats.truncnorm(a=-np.inf, b=-mean, loc=mean, scale=1.0).cdf


@pytest.mark.sampler
@pytest.mark.parametrize("mean", [-6.0, -2.0, 0.0, 2.0, 6.0])
@pytest.mark.parametrize("positive", [True, False])
def test_draws_follow_truncated_normal(mean: float, positive: bool) -> None:
    rng = np.random.default_rng(1000 + int(mean * 10) + positive)
    draws = sample_truncated_normal_array(np.full(SAMPLES, mean), np.full(SAMPLES, positive), rng)

    if positive:
        assert (draws > 0).all()
    else:
        assert (draws <= 0).all()
    result = stats.kstest(draws, _reference_cdf(mean, positive))
    assert result.statistic < 0.01


@pytest.mark.sampler
def test_zero_mean_positive_side_is_half_normal(rng: np.random.Generator) -> None:
    draws = sample_truncated_normal_array(np.zeros(SAMPLES), np.ones(SAMPLES, dtype=bool), rng)

    assert draws.mean() == pytest.approx(math.sqrt(2.0 / math.pi), abs=0.02)


@pytest.mark.sampler
def test_deep_tail_mean_matches_quadrature(rng: np.random.Generator) -> None:
    mean = -6.0
    draws = sample_truncated_normal_array(np.full(SAMPLES, mean), np.ones(SAMPLES, dtype=bool), rng)

    mass = stats.norm.sf(-mean)
    expected, _ = integrate.quad(lambda x: x * stats.norm.pdf(x - mean) / mass, 0.0, np.inf)

    assert draws.mean() == pytest.approx(expected, abs=0.01)


@pytest.mark.sampler
def test_extreme_means_stay_finite(rng: np.random.Generator) -> None:
    draws = sample_truncated_normal_array(np.array([-40.0, 40.0]), np.array([True, False]), rng)

    assert np.isfinite(draws).all()
    assert draws[0] > 0
    assert draws[1] <= 0


@pytest.mark.sampler
def test_same_seed_same_draws() -> None:
    first = sample_truncated_normal(1.5, "nonpositive", np.random.default_rng(3))
    second = sample_truncated_normal(1.5, "nonpositive", np.random.default_rng(3))

    assert first == second
    assert first <= 0


@pytest.mark.sampler
def test_invalid_arguments_raise(rng: np.random.Generator) -> None:
    with pytest.raises(DomainError):
        sample_truncated_normal(math.nan, "positive", rng)
    with pytest.raises(DomainError):
        sample_truncated_normal(0.0, "sideways", rng)  # type: ignore[arg-type]
    with pytest.raises(DomainError):
        sample_truncated_normal_array(np.array([math.inf]), np.array([True]), rng)

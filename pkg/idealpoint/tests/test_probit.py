"""Tests for the probit link, default priors and likelihood."""

from __future__ import annotations

import math

import numpy as np
import pytest
from scipy.stats import norm

from idealpoint.src.errors import DomainError, ValidationError
from idealpoint.src.models import Hyperparameters, ModelParameters
from idealpoint.src.probit import default_hyperparameters, log_likelihood, vote_probability
from idealpoint.tests.conftest import make_matrix


@pytest.mark.model
def test_default_hyperparameters_shapes() -> None:
    hyper = default_hyperparameters(3, 2)

    np.testing.assert_array_equal(hyper.a, np.zeros(3))
    np.testing.assert_array_equal(hyper.A, 25.0 * np.eye(3))
    assert hyper.b.shape == (3, 2)
    np.testing.assert_array_equal(hyper.B[1], np.eye(2))


@pytest.mark.model
def test_default_hyperparameters_single_legislator() -> None:
    hyper = default_hyperparameters(1, 1)

    assert hyper.n == 1
    assert hyper.B.shape == (1, 1, 1)


@pytest.mark.model
@pytest.mark.parametrize("n, d, sigma2", [(0, 1, 25.0), (3, 0, 25.0), (3, 1, -1.0), (3, 1, math.inf)])
def test_default_hyperparameters_rejects_bad_arguments(n: int, d: int, sigma2: float) -> None:
    with pytest.raises(DomainError):
        default_hyperparameters(n, d, sigma2)


@pytest.mark.model
def test_hyperparameters_require_positive_definite_blocks() -> None:
    with pytest.raises(DomainError):
        Hyperparameters(a=np.zeros(2), A=np.array([[1.0, 2.0], [2.0, 1.0]]), b=np.zeros((1, 1)), B=np.ones((1, 1, 1)))
    with pytest.raises(ValidationError):
        Hyperparameters(a=np.zeros(3), A=np.eye(3), b=np.zeros((1, 1)), B=np.ones((1, 1, 1)))


@pytest.mark.model
def test_vote_probability_at_origin() -> None:
    assert vote_probability(0.0, np.zeros(1), np.zeros(1)) == 0.5


@pytest.mark.model
def test_vote_probability_matches_normal_cdf() -> None:
    value = vote_probability(0.3, np.array([1.2]), np.array([-0.5]))

    assert value == pytest.approx(norm.cdf(-0.3), abs=1e-12)


@pytest.mark.model
def test_vote_probability_extremes_stay_in_unit_interval() -> None:
    high = vote_probability(40.0, np.zeros(1), np.zeros(1))
    low = vote_probability(-40.0, np.zeros(1), np.zeros(1))

    assert 0.0 <= low < 1e-300
    assert high == 1.0


@pytest.mark.model
def test_vote_probability_validates_inputs() -> None:
    with pytest.raises(ValidationError):
        vote_probability(0.0, np.zeros(2), np.zeros(1))
    with pytest.raises(DomainError):
        vote_probability(math.nan, np.zeros(1), np.zeros(1))


def _naive_log_likelihood(votes: list[list[int]], mu: np.ndarray, alpha: np.ndarray, beta: np.ndarray) -> float:
    total = 0.0
    for i, row in enumerate(votes):
        for j, vote in enumerate(row):
            if vote < 0:
                continue
            p = norm.cdf(mu[j] + float(alpha[j] @ beta[i]))
            total += math.log(p if vote == 1 else 1.0 - p)
    return total


@pytest.mark.model
def test_log_likelihood_matches_double_loop(rng: np.random.Generator) -> None:
    votes = [[1, 0, -1], [0, 1, 1], [1, 1, 0], [-1, 0, 1]]
    mu = rng.normal(size=3)
    alpha = rng.normal(size=(3, 1))
    beta = rng.normal(size=(4, 1))
    params = ModelParameters(mu=mu, alpha=alpha, beta=beta)

    expected = _naive_log_likelihood(votes, mu, alpha, beta)

    assert log_likelihood(make_matrix(votes), params) == pytest.approx(expected, rel=1e-12)


@pytest.mark.model
def test_log_likelihood_is_rotation_invariant(rng: np.random.Generator) -> None:
    votes = [[1, 0, 1], [0, 1, 1], [1, 1, 0]]
    params = ModelParameters(mu=rng.normal(size=3), alpha=rng.normal(size=(3, 2)), beta=rng.normal(size=(3, 2)))
    angle = 0.7
    rotation = np.array([[math.cos(angle), -math.sin(angle)], [math.sin(angle), math.cos(angle)]])
    rotated = ModelParameters(mu=params.mu, alpha=params.alpha @ rotation, beta=params.beta @ rotation)

    matrix = make_matrix(votes)

    assert log_likelihood(matrix, rotated) == pytest.approx(log_likelihood(matrix, params), rel=1e-10)


@pytest.mark.model
def test_offset_adds_to_the_linear_predictor(rng: np.random.Generator) -> None:
    votes = [[1, 0, -1], [0, 1, 1], [1, 1, 0], [-1, 0, 1]]
    mu = rng.normal(size=3)
    alpha = rng.normal(size=(3, 1))
    beta = rng.normal(size=(4, 1))
    column_shift = np.array([0.4, -1.1, 0.25])
    matrix = make_matrix(votes)

    shifted_mu = ModelParameters(mu=mu + column_shift, alpha=alpha, beta=beta)
    with_offset = log_likelihood(
        matrix, ModelParameters(mu=mu, alpha=alpha, beta=beta), offset=np.tile(column_shift, (4, 1))
    )

    assert with_offset == pytest.approx(_naive_log_likelihood(votes, mu + column_shift, alpha, beta), rel=1e-12)
    assert with_offset == pytest.approx(log_likelihood(matrix, shifted_mu), rel=1e-12)
    with pytest.raises(ValidationError, match="offset"):
        log_likelihood(matrix, shifted_mu, offset=np.zeros((3, 4)))


@pytest.mark.model
def test_log_likelihood_rejects_mismatched_shapes() -> None:
    params = ModelParameters(mu=np.zeros(2), alpha=np.zeros((2, 1)), beta=np.zeros((3, 1)))

    with pytest.raises(ValidationError):
        log_likelihood(make_matrix([[1, 0, 1], [0, 1, 1], [1, 1, 0]]), params)


@pytest.mark.model
def test_log_likelihood_stays_finite_in_the_tails() -> None:
    params = ModelParameters(mu=np.array([-30.0]), alpha=np.zeros((1, 1)), beta=np.zeros((2, 1)))

    value = log_likelihood(make_matrix([[1], [0]]), params)

    assert math.isfinite(value)
    assert value < -400


@pytest.mark.model
def test_model_parameters_reject_non_finite_values() -> None:
    with pytest.raises(DomainError):
        ModelParameters(mu=np.array([math.inf]), alpha=np.zeros((1, 1)), beta=np.zeros((2, 1)))

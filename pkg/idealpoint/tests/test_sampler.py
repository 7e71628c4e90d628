"""Gibbs sampler tests: conditional updates, anchoring, reproducibility and a quadrature oracle."""

from __future__ import annotations

import numpy as np
import pytest
from scipy.stats import norm

from idealpoint.src.errors import LinearAlgebraError, ValidationError
from idealpoint.src.models import AnchorSpec, ModelParameters
from idealpoint.src.probit import default_hyperparameters
from idealpoint.src.sampler import (
    SweepStats,
    draw_from_precision,
    run_gibbs,
    update_ideal_points,
    update_item_parameters,
    update_latents,
)
from idealpoint.src.schemas import SamplerConfig
from idealpoint.tests.conftest import make_matrix


SMALL_VOTES = [
    [1, 1, 0, 1, 0],
    [1, 0, 0, 1, -1],
    [1, 1, 1, 0, 0],
    [0, 1, 1, 0, 1],
    [0, 0, 1, -1, 1],
    [0, 0, 1, 0, 1],
]


def _small_run(**overrides: int) -> tuple:
    matrix = make_matrix(SMALL_VOTES)
    anchors = AnchorSpec(anchors=[("L1", [-1.0]), ("L6", [1.0])])
    settings = {"iterations": 300, "burn_in": 100, "thin": 2, "chains": 2, "seed": 5}
    settings.update(overrides)
    config = SamplerConfig(**settings)
    return matrix, run_gibbs(matrix, default_hyperparameters(matrix.n, 1), anchors, config)


@pytest.mark.sampler
def test_draw_from_precision_moments(rng: np.random.Generator) -> None:
    precision = np.array([[2.0, 0.5], [0.5, 1.0]])
    shift = np.array([1.0, -1.0])
    batch = 40_000
    draws = draw_from_precision(np.broadcast_to(precision, (batch, 2, 2)), np.broadcast_to(shift, (batch, 2)), rng)

    covariance = np.linalg.inv(precision)
    np.testing.assert_allclose(draws.mean(axis=0), covariance @ shift, atol=0.02)
    np.testing.assert_allclose(np.cov(draws.T), covariance, atol=0.02)


@pytest.mark.sampler
def test_singular_precision_gets_jitter(rng: np.random.Generator) -> None:
    stats = SweepStats()
    draws = draw_from_precision(np.zeros((1, 1, 1)), np.zeros((1, 1)), rng, stats)

    assert stats.jitter_events == 1
    assert draws.shape == (1, 1)


@pytest.mark.sampler
def test_indefinite_precision_raises(rng: np.random.Generator) -> None:
    with pytest.raises(LinearAlgebraError):
        draw_from_precision(-np.ones((1, 1, 1)), np.zeros((1, 1)), rng)


@pytest.mark.sampler
def test_latents_respect_vote_signs_and_missing(rng: np.random.Generator) -> None:
    matrix = make_matrix(SMALL_VOTES)
    params = ModelParameters(mu=rng.normal(size=5), alpha=rng.normal(size=(5, 1)), beta=rng.normal(size=(6, 1)))
    latents = update_latents(matrix, params, rng)

    assert np.isnan(latents[~matrix.observed]).all()
    assert (latents[matrix.yea] > 0).all()
    assert (latents[matrix.observed & ~matrix.yea] <= 0).all()


@pytest.mark.sampler
def test_item_update_matches_ridge_formula(rng: np.random.Generator) -> None:
    # One latent column replicated over many motions gives many independent draws of the same conditional.
    replicas = 20_000
    beta = np.array([[1.0], [-1.0]])
    column = np.array([0.5, -0.3])
    latents = np.tile(column[:, np.newaxis], (1, replicas))
    hyper = default_hyperparameters(2, 1)

    mu, alpha = update_item_parameters(latents, beta, hyper, rng)

    design = np.hstack([np.ones((2, 1)), beta])
    precision = np.linalg.inv(hyper.A) + design.T @ design
    expected = np.linalg.solve(precision, design.T @ column)
    assert mu.mean() == pytest.approx(expected[0], abs=0.02)
    assert alpha[:, 0].mean() == pytest.approx(expected[1], abs=0.02)
    assert np.var(mu) == pytest.approx(np.linalg.inv(precision)[0, 0], rel=0.05)


@pytest.mark.sampler
def test_item_update_skips_missing_cells(rng: np.random.Generator) -> None:
    replicas = 20_000
    latents = np.tile(np.array([[0.8], [np.nan]]), (1, replicas))
    beta = np.array([[1.0], [5.0]])
    hyper = default_hyperparameters(2, 1)

    mu, alpha = update_item_parameters(latents, beta, hyper, rng)

    design = np.array([[1.0, 1.0]])
    precision = np.linalg.inv(hyper.A) + design.T @ design
    expected = np.linalg.solve(precision, design.T @ np.array([0.8]))
    assert mu.mean() == pytest.approx(expected[0], abs=0.03)
    assert alpha[:, 0].mean() == pytest.approx(expected[1], abs=0.03)


@pytest.mark.sampler
def test_ideal_point_update_matches_conjugate_mean(rng: np.random.Generator) -> None:
    replicas = 20_000
    mu = np.array([0.2, -0.4, 0.1])
    alpha = np.array([[1.0], [0.5], [-2.0]])
    row = np.array([1.0, -0.5, 0.3])
    latents = np.tile(row, (replicas, 1))
    hyper = default_hyperparameters(replicas, 1)

    beta = update_ideal_points(latents, mu, alpha, hyper, AnchorSpec(), rng)

    precision = 1.0 + float(alpha[:, 0] @ alpha[:, 0])
    expected = float((row - mu) @ alpha[:, 0]) / precision
    assert beta[:, 0].mean() == pytest.approx(expected, abs=0.01)
    assert beta[:, 0].var() == pytest.approx(1.0 / precision, rel=0.05)


@pytest.mark.sampler
def test_anchored_rows_never_move() -> None:
    matrix, draws = _small_run()

    np.testing.assert_array_equal(draws.beta[:, :, 0, 0], -1.0)
    np.testing.assert_array_equal(draws.beta[:, :, 5, 0], 1.0)
    assert draws.anchors == {"L1": [-1.0], "L6": [1.0]}
    assert draws.beta.shape == (2, 100, matrix.n, 1)
    assert draws.iterations.tolist()[:2] == [102, 104]


@pytest.mark.sampler
def test_same_seed_reproduces_draws() -> None:
    _, first = _small_run()
    _, second = _small_run()

    np.testing.assert_array_equal(first.beta, second.beta)
    np.testing.assert_array_equal(first.mu, second.mu)


@pytest.mark.sampler
def test_threads_do_not_change_draws() -> None:
    _, serial = _small_run(threads=1)
    _, threaded = _small_run(threads=2)

    np.testing.assert_array_equal(serial.alpha, threaded.alpha)
    np.testing.assert_array_equal(serial.beta, threaded.beta)


@pytest.mark.sampler
def test_chains_use_distinct_streams() -> None:
    _, draws = _small_run()

    assert not np.array_equal(draws.mu[0], draws.mu[1])


@pytest.mark.sampler
def test_zero_retained_draws_raise() -> None:
    matrix = make_matrix(SMALL_VOTES)
    config = SamplerConfig(iterations=10, burn_in=10, thin=1, seed=1)

    with pytest.raises(ValidationError, match="retain no draws"):
        run_gibbs(matrix, default_hyperparameters(matrix.n, 1), AnchorSpec(anchors=[("L1", [-1.0])]), config)


@pytest.mark.sampler
def test_short_runs_warn() -> None:
    with pytest.warns(RuntimeWarning, match="retained draws"):
        _small_run(iterations=40, burn_in=10, thin=1)


@pytest.mark.sampler
def test_unfiltered_matrix_is_rejected() -> None:
    matrix = make_matrix([[1, 1, 0], [1, 0, 1], [1, 1, 1]])
    config = SamplerConfig(iterations=50, seed=1)

    with pytest.raises(ValidationError, match="Unanimous"):
        run_gibbs(matrix, default_hyperparameters(3, 1), AnchorSpec(anchors=[("L1", [1.0])]), config)


@pytest.mark.sampler
def test_unknown_anchor_is_rejected() -> None:
    matrix = make_matrix(SMALL_VOTES)
    config = SamplerConfig(iterations=50, seed=1)

    with pytest.raises(ValidationError, match="Unknown anchor"):
        run_gibbs(matrix, default_hyperparameters(matrix.n, 1), AnchorSpec(anchors=[("L99", [1.0])]), config)


def _grid_posterior_means(
    votes: np.ndarray, anchor: float, sigma2: float
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Exhaustive quadrature for one anchored and two free legislators in one dimension.

    Given both free ideal points the motions are independent, so each motion adds a
    (mu, alpha) integral evaluated on every node of the two-dimensional beta grid.
    """
    betas = np.linspace(-5.0, 5.0, 161)
    nodes = np.linspace(-6.0 * np.sqrt(sigma2), 6.0 * np.sqrt(sigma2), 121)
    mu, alpha = np.meshgrid(nodes, nodes, indexing="ij")
    prior = norm.pdf(mu, scale=np.sqrt(sigma2)) * norm.pdf(alpha, scale=np.sqrt(sigma2))
    index = np.meshgrid(betas, betas, indexing="ij")

    m = votes.shape[1]
    shape = (betas.size, betas.size, m)
    likelihood, mu_moment, alpha_moment = np.empty(shape), np.empty(shape), np.empty(shape)
    for j in range(m):
        sign = np.where(votes[:, j] == 1, 1.0, -1.0)
        anchored = prior * norm.cdf(sign[0] * (mu + alpha * anchor))
        # (beta node, mu node, alpha node) vote probabilities of each free legislator.
        second = norm.cdf(sign[1] * (mu[np.newaxis] + alpha[np.newaxis] * betas[:, np.newaxis, np.newaxis]))
        third = norm.cdf(sign[2] * (mu[np.newaxis] + alpha[np.newaxis] * betas[:, np.newaxis, np.newaxis]))
        for k, row in enumerate(second):
            weight = anchored * row
            likelihood[k, :, j] = np.einsum("ab,kab->k", weight, third)
            mu_moment[k, :, j] = np.einsum("ab,kab->k", weight * mu, third)
            alpha_moment[k, :, j] = np.einsum("ab,kab->k", weight * alpha, third)

    joint = norm.pdf(index[0]) * norm.pdf(index[1]) * likelihood.prod(axis=2)
    joint /= joint.sum()
    beta_mean = np.array([(joint * index[0]).sum(), (joint * index[1]).sum()])
    mu_mean = np.einsum("kl,klj->j", joint, mu_moment / likelihood)
    alpha_mean = np.einsum("kl,klj->j", joint, alpha_moment / likelihood)
    return beta_mean, mu_mean, alpha_mean


@pytest.mark.sampler
@pytest.mark.slow
def test_gibbs_matches_grid_quadrature() -> None:
    votes = np.array([[1, 0], [0, 1], [1, 1]], dtype=np.int8)
    sigma2 = 1.0
    matrix = make_matrix(votes.tolist())
    anchors = AnchorSpec(anchors=[("L1", [1.0])])
    config = SamplerConfig(iterations=25_000, burn_in=1_000, thin=1, chains=4, seed=2024, threads=4)

    draws = run_gibbs(matrix, default_hyperparameters(3, 1, sigma2=sigma2), anchors, config)
    beta_mean, mu_mean, alpha_mean = _grid_posterior_means(votes, 1.0, sigma2)

    np.testing.assert_allclose(draws.pooled("beta")[:, 1:, 0].mean(axis=0), beta_mean, atol=0.05)
    np.testing.assert_allclose(draws.pooled("mu").mean(axis=0), mu_mean, atol=0.05)
    np.testing.assert_allclose(draws.pooled("alpha")[:, :, 0].mean(axis=0), alpha_mean, atol=0.05)


@pytest.mark.sampler
def test_augmentation_marginalizes_to_the_probit_model() -> None:
    rng = np.random.default_rng(31)
    theta = np.array([-2.5, -1.0, -0.3, 0.0, 0.4, 1.2, 2.5])
    replicates = 20_000

    bernoulli = rng.random((replicates, theta.size)) < norm.cdf(theta)
    latent_sign = theta + rng.standard_normal((replicates, theta.size)) > 0
    p = norm.cdf(theta)
    standard_error = np.sqrt(2.0 * p * (1.0 - p) / replicates)
    assert (np.abs(bernoulli.mean(axis=0) - latent_sign.mean(axis=0)) < 3.0 * standard_error).all()

    # Drawing z | y for Bernoulli votes gives back the untruncated N(theta, 1) marginal.
    matrix = make_matrix(bernoulli.astype(int).tolist())
    params = ModelParameters(mu=theta, alpha=np.zeros((theta.size, 1)), beta=np.zeros((replicates, 1)))
    latents = update_latents(matrix, params, rng)

    np.testing.assert_array_equal(latents > 0, bernoulli)
    assert (np.abs(latents.mean(axis=0) - theta) < 4.0 / np.sqrt(replicates)).all()
    assert (np.abs(latents.std(axis=0) - 1.0) < 0.03).all()

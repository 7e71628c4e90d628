"""Gibbs sampler with probit data augmentation for the ideal point model."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
import logging
import time
import warnings

import numpy as np

from idealpoint.src.errors import LinearAlgebraError, ValidationError
from idealpoint.src.identify import validate_anchors
from idealpoint.src.models import AnchorSpec, Hyperparameters, ModelParameters, PosteriorDraws, RollCallMatrix
from idealpoint.src.probit import linear_predictor
from idealpoint.src.schemas import SamplerConfig
from idealpoint.src.truncnorm import sample_truncated_normal_array


logger = logging.getLogger(__name__)

JITTER = 1e-10
INIT_SCALE = 0.1
MIN_RECOMMENDED_DRAWS = 100


@dataclass(slots=True)
class SweepStats:
    jitter_events: int = 0


@dataclass(slots=True)
class CovariatePrior:
    """Independent normal prior on the coefficients of extra design columns."""

    mean: np.ndarray
    variance: np.ndarray


@dataclass(slots=True)
class _ChainResult:
    mu: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray
    extra: np.ndarray
    latents: np.ndarray
    jitter_events: int
    seconds: float


def _cholesky_with_jitter(precision: np.ndarray, stats: SweepStats | None, label: str) -> np.ndarray:
    lower = np.empty_like(precision)
    eye = np.eye(precision.shape[-1])
    for index, block in enumerate(precision):
        try:
            lower[index] = np.linalg.cholesky(block)
            continue
        except np.linalg.LinAlgError:
            pass
        logger.warning("Added %.0e diagonal jitter to the %s precision at index %d", JITTER, label, index)
        if stats is not None:
            stats.jitter_events += 1
        try:
            lower[index] = np.linalg.cholesky(block + JITTER * eye)
        except np.linalg.LinAlgError as exc:
            raise LinearAlgebraError(f"{label} precision at index {index} is not positive definite") from exc
    return lower


def draw_from_precision(
    precision: np.ndarray,
    shift: np.ndarray,
    rng: np.random.Generator,
    stats: SweepStats | None = None,
    label: str = "block",
) -> np.ndarray:
    """Batched draws from N(P^{-1} h, P^{-1}) for precisions P (b,k,k) and shifts h (b,k).

    With P = L L^T the draw is L^{-T}(L^{-1} h + eps), eps standard normal.
    """
    try:
        lower = np.linalg.cholesky(precision)
    except np.linalg.LinAlgError:
        lower = _cholesky_with_jitter(precision, stats, label)
    eps = rng.standard_normal(shift.shape)
    whitened = np.linalg.solve(lower, shift[..., np.newaxis])[..., 0]
    upper = np.swapaxes(lower, -1, -2)
    return np.linalg.solve(upper, (whitened + eps)[..., np.newaxis])[..., 0]


def update_latents(
    matrix: RollCallMatrix,
    params: ModelParameters,
    rng: np.random.Generator,
    offset: np.ndarray | None = None,
) -> np.ndarray:
    """Draw z_ij for every observed cell; Missing cells hold NaN."""
    params.check_shapes(matrix)
    theta = linear_predictor(params, offset)
    observed = matrix.observed
    latents = np.full(theta.shape, np.nan)
    latents[observed] = sample_truncated_normal_array(theta[observed], matrix.yea[observed], rng)
    return latents


def draw_item_coefficients(
    latents: np.ndarray,
    design: np.ndarray,
    prior_precision: np.ndarray,
    prior_shift: np.ndarray,
    rng: np.random.Generator,
    stats: SweepStats | None = None,
) -> np.ndarray:
    """Conjugate regression of each latent column on the design rows of its voters.

    Returns an (m, k) array of coefficient draws, k = design.shape[1].
    """
    observed = ~np.isnan(latents)
    filled = np.where(observed, latents, 0.0)
    weights = observed.astype(float)
    precision = prior_precision[np.newaxis, :, :] + np.einsum("ij,ik,il->jkl", weights, design, design)
    shift = prior_shift[np.newaxis, :] + filled.T @ design
    return draw_from_precision(precision, shift, rng, stats, label="item")


def update_item_parameters(
    latents: np.ndarray,
    beta: np.ndarray,
    hyper: Hyperparameters,
    rng: np.random.Generator,
    stats: SweepStats | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    beta = np.asarray(beta, dtype=float).reshape(latents.shape[0], -1)
    design = np.hstack([np.ones((beta.shape[0], 1)), beta])
    prior_precision = np.linalg.inv(hyper.A)
    coefficients = draw_item_coefficients(latents, design, prior_precision, prior_precision @ hyper.a, rng, stats)
    return coefficients[:, 0], coefficients[:, 1:]


def _anchor_rows(anchors: AnchorSpec, legislator_ids: list[str] | None) -> list[tuple[int, np.ndarray]]:
    if not anchors.count:
        return []
    if legislator_ids is None:
        raise ValidationError("legislator_ids are required to place anchored legislators")
    lookup = {legislator_id: index for index, legislator_id in enumerate(legislator_ids)}
    rows: list[tuple[int, np.ndarray]] = []
    for legislator_id, position in anchors.anchors:
        if legislator_id not in lookup:
            raise ValidationError(f"Unknown anchor legislator id: {legislator_id}")
        rows.append((lookup[legislator_id], position))
    return rows


def update_ideal_points(
    latents: np.ndarray,
    mu: np.ndarray,
    alpha: np.ndarray,
    hyper: Hyperparameters,
    anchors: AnchorSpec,
    rng: np.random.Generator,
    *,
    legislator_ids: list[str] | None = None,
    offset: np.ndarray | None = None,
    stats: SweepStats | None = None,
) -> np.ndarray:
    observed = ~np.isnan(latents)
    alpha = np.asarray(alpha, dtype=float).reshape(latents.shape[1], -1)
    residual = latents - np.asarray(mu, dtype=float)[np.newaxis, :]
    if offset is not None:
        residual = residual - offset
    residual = np.where(observed, residual, 0.0)

    prior_precision = np.linalg.inv(hyper.B)
    precision = prior_precision + np.einsum("ij,jk,jl->ikl", observed.astype(float), alpha, alpha)
    shift = np.einsum("ikl,il->ik", prior_precision, hyper.b) + residual @ alpha
    beta = draw_from_precision(precision, shift, rng, stats, label="ideal point")
    for row, position in _anchor_rows(anchors, legislator_ids):
        beta[row] = position
    return beta


def _check_sampling_preconditions(matrix: RollCallMatrix, hyper: Hyperparameters, config: SamplerConfig) -> None:
    if hyper.n != matrix.n:
        raise ValidationError(f"Hyperparameters cover {hyper.n} legislators but the matrix has {matrix.n}")
    if hyper.d != config.d:
        raise ValidationError(f"Hyperparameters have dimension {hyper.d} but the sampler runs d={config.d}")
    observed = matrix.observed
    empty_rows = np.flatnonzero(~observed.any(axis=1))
    if empty_rows.size:
        ids = ", ".join(matrix.legislator_ids[i] for i in empty_rows[:5])
        raise ValidationError(f"Legislators without any observed vote: {ids}; filter the matrix first")
    empty_columns = np.flatnonzero(~observed.any(axis=0))
    if empty_columns.size:
        ids = ", ".join(matrix.motion_ids[j] for j in empty_columns[:5])
        raise ValidationError(f"Motions without any observed vote: {ids}; filter the matrix first")
    yeas = (matrix.yea & observed).sum(axis=0)
    totals = observed.sum(axis=0)
    unanimous = np.flatnonzero((yeas == 0) | (yeas == totals))
    if unanimous.size:
        ids = ", ".join(matrix.motion_ids[j] for j in unanimous[:5])
        raise ValidationError(f"Unanimous motions must be removed before sampling: {ids}")

    retained = config.retained_draws
    if retained == 0:
        raise ValidationError(
            f"iterations={config.iterations}, burn_in={config.burn_in}, thin={config.thin} retain no draws"
        )
    if retained < MIN_RECOMMENDED_DRAWS:
        message = f"Only {retained} retained draws per chain; at least {MIN_RECOMMENDED_DRAWS} are recommended"
        logger.warning(message)
        warnings.warn(message, RuntimeWarning, stacklevel=3)


def _sample_chain(
    matrix: RollCallMatrix,
    hyper: Hyperparameters,
    anchors: AnchorSpec,
    config: SamplerConfig,
    covariates: np.ndarray,
    covariate_prior: CovariatePrior | None,
    rng: np.random.Generator,
    chain: int,
) -> _ChainResult:
    started = time.perf_counter()
    n, m, d = matrix.n, matrix.m, config.d
    q = covariates.shape[1]
    stats = SweepStats()
    legislator_ids = matrix.legislator_ids

    item_precision = np.linalg.inv(hyper.A)
    item_shift = item_precision @ hyper.a
    if q:
        extra_precision = np.diag(1.0 / covariate_prior.variance)
        item_precision = np.block(
            [[item_precision, np.zeros((d + 1, q))], [np.zeros((q, d + 1)), extra_precision]]
        )
        item_shift = np.concatenate([item_shift, covariate_prior.mean / covariate_prior.variance])

    beta = np.asarray(hyper.b, dtype=float) + INIT_SCALE * rng.standard_normal((n, d))
    for row, position in _anchor_rows(anchors, legislator_ids):
        beta[row] = position
    mu = np.zeros(m)
    alpha = np.zeros((m, d))
    extra = np.zeros((m, q))

    retained = config.retained_draws
    kept_mu = np.empty((retained, m))
    kept_alpha = np.empty((retained, m, d))
    kept_beta = np.empty((retained, n, d))
    kept_extra = np.empty((retained, m, q))
    slot = 0
    latents = np.full((n, m), np.nan)

    for sweep in range(1, config.iterations + 1):
        offset = covariates @ extra.T if q else None
        latents = update_latents(matrix, ModelParameters(mu=mu, alpha=alpha, beta=beta), rng, offset)

        design = np.hstack([np.ones((n, 1)), beta, covariates])
        coefficients = draw_item_coefficients(latents, design, item_precision, item_shift, rng, stats)
        mu = coefficients[:, 0]
        alpha = coefficients[:, 1 : d + 1]
        extra = coefficients[:, d + 1 :]

        offset = covariates @ extra.T if q else None
        beta = update_ideal_points(
            latents,
            mu,
            alpha,
            hyper,
            anchors,
            rng,
            legislator_ids=legislator_ids,
            offset=offset,
            stats=stats,
        )

        if sweep > config.burn_in and (sweep - config.burn_in) % config.thin == 0:
            kept_mu[slot] = mu
            kept_alpha[slot] = alpha
            kept_beta[slot] = beta
            kept_extra[slot] = extra
            slot += 1

    seconds = time.perf_counter() - started
    logger.info("Chain %d finished %d sweeps in %.1fs", chain, config.iterations, seconds)
    return _ChainResult(
        mu=kept_mu,
        alpha=kept_alpha,
        beta=kept_beta,
        extra=kept_extra,
        latents=latents,
        jitter_events=stats.jitter_events,
        seconds=seconds,
    )


def run_augmented_gibbs(
    matrix: RollCallMatrix,
    hyper: Hyperparameters,
    anchors: AnchorSpec,
    config: SamplerConfig,
    covariates: np.ndarray | None = None,
    covariate_prior: CovariatePrior | None = None,
) -> tuple[PosteriorDraws, np.ndarray | None]:
    """Run all chains; extra design columns get motion-specific coefficients.

    Returns the draws and, when covariates are given, their (chain, draw, m, q) coefficients.
    """
    _check_sampling_preconditions(matrix, hyper, config)
    report = validate_anchors(matrix, anchors, config.d)
    for message in report.warnings:
        logger.warning(message)

    if covariates is None:
        covariates = np.zeros((matrix.n, 0))
    covariates = np.asarray(covariates, dtype=float).reshape(matrix.n, -1)
    if covariates.shape[1] and covariate_prior is None:
        raise ValidationError("A covariate prior is required when covariates are supplied")

    streams = np.random.SeedSequence(config.seed).spawn(config.chains)
    rngs = [np.random.default_rng(stream) for stream in streams]

    def run(chain: int) -> _ChainResult:
        return _sample_chain(matrix, hyper, anchors, config, covariates, covariate_prior, rngs[chain], chain)

    started = time.perf_counter()
    workers = min(config.threads, config.chains)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, range(config.chains)))
    else:
        results = [run(chain) for chain in range(config.chains)]
    wall_time = time.perf_counter() - started

    iterations = np.arange(config.burn_in + config.thin, config.iterations + 1, config.thin)[: config.retained_draws]
    draws = PosteriorDraws(
        mu=np.stack([item.mu for item in results]),
        alpha=np.stack([item.alpha for item in results]),
        beta=np.stack([item.beta for item in results]),
        legislator_ids=matrix.legislator_ids,
        motion_ids=matrix.motion_ids,
        config=config,
        iterations=iterations,
        anchors=anchors.as_dict(),
        wall_time_seconds=wall_time,
        jitter_events=sum(item.jitter_events for item in results),
        final_latents=np.stack([item.latents for item in results]),
    )
    extra = np.stack([item.extra for item in results]) if covariates.shape[1] else None
    return draws, extra


def run_gibbs(
    matrix: RollCallMatrix,
    hyper: Hyperparameters,
    anchors: AnchorSpec,
    config: SamplerConfig,
) -> PosteriorDraws:
    draws, _ = run_augmented_gibbs(matrix, hyper, anchors, config)
    return draws

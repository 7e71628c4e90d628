"""Probit link, priors and likelihood of the quadratic-utility ideal point model."""

from __future__ import annotations

import math

import numpy as np
from scipy.special import log_ndtr, ndtr

from idealpoint.src.errors import DomainError, ValidationError
from idealpoint.src.models import Hyperparameters, ModelParameters, RollCallMatrix, is_positive_definite


DEFAULT_SIGMA2 = 25.0

__all__ = [
    "DEFAULT_SIGMA2",
    "default_hyperparameters",
    "is_positive_definite",
    "linear_predictor",
    "log_likelihood",
    "vote_probability",
]


def default_hyperparameters(n: int, d: int, sigma2: float = DEFAULT_SIGMA2) -> Hyperparameters:
    if n < 1:
        raise DomainError(f"n must be at least 1 (got {n})")
    if d < 1:
        raise DomainError(f"d must be at least 1 (got {d})")
    if not math.isfinite(sigma2) or sigma2 <= 0:
        raise DomainError(f"sigma2 must be a positive real (got {sigma2})")
    return Hyperparameters(
        a=np.zeros(d + 1),
        A=sigma2 * np.eye(d + 1),
        b=np.zeros((n, d)),
        B=np.broadcast_to(np.eye(d), (n, d, d)).copy(),
    )


def vote_probability(mu_j: float, alpha_j: np.ndarray, beta_i: np.ndarray) -> float:
    alpha_j = np.atleast_1d(np.asarray(alpha_j, dtype=float))
    beta_i = np.atleast_1d(np.asarray(beta_i, dtype=float))
    if alpha_j.shape != beta_i.shape:
        raise ValidationError(f"alpha_j has shape {alpha_j.shape} but beta_i has {beta_i.shape}")
    if not (math.isfinite(mu_j) and np.isfinite(alpha_j).all() and np.isfinite(beta_i).all()):
        raise DomainError("vote_probability requires finite inputs")
    return float(ndtr(mu_j + float(alpha_j @ beta_i)))


def linear_predictor(params: ModelParameters, offset: np.ndarray | None = None) -> np.ndarray:
    """Return the n×m grid of mu_j + alpha_j·beta_i, plus an optional additive offset."""
    theta = params.mu[np.newaxis, :] + params.beta @ params.alpha.T
    if offset is not None:
        theta = theta + offset
    return theta


def log_likelihood(matrix: RollCallMatrix, params: ModelParameters, offset: np.ndarray | None = None) -> float:
    params.check_shapes(matrix)
    if params.d != params.beta.shape[1]:
        raise ValidationError("Inconsistent parameter dimension")
    if offset is not None and offset.shape != (matrix.n, matrix.m):
        raise ValidationError(f"offset must be {matrix.n}x{matrix.m}, got {offset.shape}")
    theta = linear_predictor(params, offset)
    # log(1 - Phi(theta)) is evaluated as log Phi(-theta) to keep the tails finite.
    signed = np.where(matrix.yea, theta, -theta)
    contributions = np.where(matrix.observed, log_ndtr(signed), 0.0)
    return float(contributions.sum())

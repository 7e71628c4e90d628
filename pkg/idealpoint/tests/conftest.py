"""Shared pytest fixtures."""

from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest

from idealpoint.src.models import AnchorSpec, PosteriorDraws, RollCallMatrix
from idealpoint.src.probit import default_hyperparameters
from idealpoint.src.sampler import run_gibbs
from idealpoint.src.schemas import LegislatorMeta, MotionMeta, SamplerConfig, SynthSpec
from idealpoint.src.synth import generate
from idealpoint.tests.generate_fixtures import generate_fixtures


PACKAGE_ROOT = Path(__file__).resolve().parent.parent


@pytest.fixture(scope="session")
def fixtures_root() -> Path:
    root = Path(__file__).parent / "fixtures"
    target = root / "chamber.csv"
    if not target.exists():
        generate_fixtures(root)
    return root


@pytest.fixture()
def demo_votes_path() -> Path:
    return PACKAGE_ROOT / "data" / "demo_votes.csv"


@pytest.fixture()
def example_config_path() -> Path:
    return PACKAGE_ROOT / "config" / "run_config.example.json"


@pytest.fixture()
def rng() -> np.random.Generator:
    return np.random.default_rng(20100720)


def make_matrix(votes: list[list[int]], parties: list[str] | None = None) -> RollCallMatrix:
    grid = np.asarray(votes, dtype=np.int8)
    n, m = grid.shape
    parties = parties or [""] * n
    return RollCallMatrix(
        votes=grid,
        legislators=[LegislatorMeta(id=f"L{i + 1}", party=parties[i]) for i in range(n)],
        motions=[MotionMeta(id=f"M{j + 1}") for j in range(m)],
    )


@pytest.fixture(scope="session")
def small_dataset():
    return generate(SynthSpec(n=30, m=60, alpha_scale=1.5, seed=7))


@pytest.fixture(scope="session")
def small_fit(small_dataset):
    """Two short chains on a 30x60 synthetic matrix with anchors at the extreme true legislators."""
    matrix = small_dataset.matrix
    beta = small_dataset.truth.beta[:, 0]
    low, high = int(np.argmin(beta)), int(np.argmax(beta))
    anchors = AnchorSpec(anchors=[(matrix.legislator_ids[low], [-1.0]), (matrix.legislator_ids[high], [1.0])])
    config = SamplerConfig(iterations=1500, burn_in=500, thin=5, chains=2, seed=11)
    draws = run_gibbs(matrix, default_hyperparameters(matrix.n, 1), anchors, config)
    return matrix, draws


def make_draws(
    beta: np.ndarray,
    mu: np.ndarray | None = None,
    alpha: np.ndarray | None = None,
    legislator_ids: list[str] | None = None,
    motion_ids: list[str] | None = None,
) -> PosteriorDraws:
    """Wrap hand-built (chain, draw, ...) arrays as PosteriorDraws."""
    beta = np.asarray(beta, dtype=float)
    if beta.ndim == 3:
        beta = beta[..., np.newaxis]
    chains, draws, n, d = beta.shape
    mu = np.zeros((chains, draws, 1)) if mu is None else np.asarray(mu, dtype=float)
    m = mu.shape[2]
    alpha = np.ones((chains, draws, m, d)) if alpha is None else np.asarray(alpha, dtype=float)
    if alpha.ndim == 3:
        alpha = alpha[..., np.newaxis]
    return PosteriorDraws(
        mu=mu,
        alpha=alpha,
        beta=beta,
        legislator_ids=legislator_ids or [f"L{i + 1}" for i in range(n)],
        motion_ids=motion_ids or [f"M{j + 1}" for j in range(m)],
        config=SamplerConfig(iterations=draws, chains=chains, d=d),
        iterations=np.arange(1, draws + 1),
    )

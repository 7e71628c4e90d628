"""Ground-truth simulator for roll-call matrices drawn from the probit ideal point model."""

from __future__ import annotations

from dataclasses import dataclass
import logging

import numpy as np
from scipy.special import ndtr

from idealpoint.src.errors import ValidationError
from idealpoint.src.models import ModelParameters, RollCallMatrix, Vote
from idealpoint.src.schemas import AnchorInput, LegislatorMeta, MotionMeta, SynthSpec


logger = logging.getLogger(__name__)


@dataclass(slots=True)
class SyntheticDataset:
    matrix: RollCallMatrix
    truth: ModelParameters
    delta: np.ndarray
    indicator: np.ndarray


def _ids(prefix: str, count: int) -> list[str]:
    width = len(str(count))
    return [f"{prefix}{index:0{width}d}" for index in range(1, count + 1)]


def _check_spec(spec: SynthSpec) -> None:
    if spec.n < 2:
        raise ValidationError(f"Simulation needs at least 2 legislators (got n={spec.n})")
    if spec.m < 1:
        raise ValidationError(f"Simulation needs at least 1 motion (got m={spec.m})")
    if spec.d < 1:
        raise ValidationError(f"Simulation needs d >= 1 (got d={spec.d})")
    if spec.delta_values is not None and not spec.delta_values:
        raise ValidationError("delta_values must hold at least one value when given")


def _draw_column(
    theta: np.ndarray,
    missing_rate: float,
    rng: np.random.Generator,
) -> np.ndarray:
    votes = np.where(rng.random(theta.shape) < ndtr(theta), Vote.YEA, Vote.NAY).astype(np.int8)
    if missing_rate > 0:
        votes[rng.random(theta.shape) < missing_rate] = Vote.MISSING
    return votes


def _informative(column: np.ndarray) -> bool:
    observed = column[column != Vote.MISSING]
    return observed.size > 0 and 0 < int((observed == Vote.YEA).sum()) < observed.size


def generate(spec: SynthSpec) -> SyntheticDataset:
    _check_spec(spec)
    rng = np.random.default_rng(spec.seed)
    n, m, d = spec.n, spec.m, spec.d

    beta = rng.standard_normal((n, d))
    alpha = spec.alpha_scale * rng.standard_normal((m, d))
    zeroed = int(round(spec.zero_alpha_fraction * m))
    if zeroed:
        alpha[rng.permutation(m)[:zeroed]] = 0.0
    mu = spec.mu_scale * rng.standard_normal(m)

    indicator = np.zeros(n, dtype=np.int8)
    members = int(round(spec.group_fraction * n))
    if spec.group_fraction > 0:
        members = min(max(members, 1), n - 1)
        indicator[rng.permutation(n)[:members]] = 1
    delta = np.zeros(m)
    if spec.delta_values is not None:
        delta = np.resize(np.asarray(spec.delta_values, dtype=float), m)

    theta = mu[np.newaxis, :] + beta @ alpha.T + np.outer(indicator, delta)
    votes = np.column_stack([_draw_column(theta[:, j], spec.missing_rate, rng) for j in range(m)])

    regenerated = 0
    for j in range(m):
        attempts = 0
        while not _informative(votes[:, j]) and attempts < spec.max_regenerations:
            votes[:, j] = _draw_column(theta[:, j], spec.missing_rate, rng)
            attempts += 1
        regenerated += attempts
        if not _informative(votes[:, j]):
            logger.warning("Motion %d stayed unanimous after %d regenerations", j + 1, attempts)
    if regenerated:
        logger.info("Regenerated %d synthetic vote columns", regenerated)

    for i in np.flatnonzero((votes == Vote.MISSING).all(axis=1)):
        # Legislators left without votes get one observed vote on a random motion.
        j = int(rng.integers(m))
        votes[i, j] = Vote.YEA if rng.random() < ndtr(theta[i, j]) else Vote.NAY

    grouped = spec.group_fraction > 0
    legislators = [
        LegislatorMeta(
            id=legislator_id,
            party=("A" if indicator[i] else "B") if grouped else "",
            group=str(int(indicator[i])) if grouped else None,
        )
        for i, legislator_id in enumerate(_ids("L", n))
    ]
    motions = [MotionMeta(id=motion_id, label=f"Synthetic motion {j + 1}") for j, motion_id in enumerate(_ids("V", m))]
    matrix = RollCallMatrix(votes=votes, legislators=legislators, motions=motions)
    truth = ModelParameters(mu=mu, alpha=alpha, beta=beta)
    return SyntheticDataset(matrix=matrix, truth=truth, delta=delta, indicator=indicator)


def simulate(spec: SynthSpec) -> tuple[RollCallMatrix, ModelParameters]:
    dataset = generate(spec)
    return dataset.matrix, dataset.truth


def suggest_anchors(truth: ModelParameters, legislator_ids: list[str]) -> list[AnchorInput]:
    """d+1 anchors at the extreme true legislators: -e1/+e1 on dimension 1, +e_k on the others."""
    d = truth.d
    order = np.argsort(truth.beta[:, 0], kind="stable")
    chosen = [int(order[0]), int(order[-1])]
    positions = [-np.eye(d)[0], np.eye(d)[0]]
    for k in range(1, d):
        for row in np.argsort(-truth.beta[:, k], kind="stable"):
            if int(row) not in chosen:
                chosen.append(int(row))
                positions.append(np.eye(d)[k])
                break
    return [
        AnchorInput(legislator_id=legislator_ids[row], position=position.tolist())
        for row, position in zip(chosen, positions)
    ]

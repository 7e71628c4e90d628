"""Domain dataclasses for roll-call matrices, model parameters and posterior draws."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import IntEnum

import numpy as np

from idealpoint.src.errors import DomainError, ValidationError
from idealpoint.src.schemas import LegislatorMeta, MotionMeta, SamplerConfig


class Vote(IntEnum):
    MISSING = -1
    NAY = 0
    YEA = 1


GIBBS_NOTE = "Gibbs sampler: every conditional draw is accepted."


def is_positive_definite(matrix: np.ndarray) -> bool:
    matrix = np.asarray(matrix, dtype=float)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        return False
    if not np.allclose(matrix, matrix.T, rtol=1e-10, atol=1e-12):
        return False
    try:
        np.linalg.cholesky(matrix)
    except np.linalg.LinAlgError:
        return False
    return True


def _frozen(values: np.ndarray) -> np.ndarray:
    values.flags.writeable = False
    return values


def _unique_ids(ids: list[str], kind: str) -> None:
    if any(not item for item in ids):
        raise ValidationError(f"{kind} ids must be nonempty")
    seen: set[str] = set()
    duplicates: set[str] = set()
    for item in ids:
        if item in seen:
            duplicates.add(item)
        seen.add(item)
    if duplicates:
        raise ValidationError(f"Duplicate {kind} ids: {', '.join(sorted(duplicates))}")


@dataclass(slots=True)
class RollCallMatrix:
    votes: np.ndarray
    legislators: list[LegislatorMeta]
    motions: list[MotionMeta]

    def __post_init__(self) -> None:
        votes = np.array(self.votes, dtype=np.int8, copy=True)
        if votes.ndim != 2:
            raise ValidationError("votes must be a two-dimensional grid")
        n, m = votes.shape
        if n < 2 or m < 1:
            raise ValidationError(f"A roll-call matrix needs at least 2 legislators and 1 motion (got {n}x{m})")
        if len(self.legislators) != n:
            raise ValidationError(f"Expected {n} legislators, got {len(self.legislators)}")
        if len(self.motions) != m:
            raise ValidationError(f"Expected {m} motions, got {len(self.motions)}")
        if not np.isin(votes, [Vote.MISSING, Vote.NAY, Vote.YEA]).all():
            raise ValidationError("votes may only contain Yea (1), Nay (0) or Missing (-1)")
        _unique_ids([item.id for item in self.legislators], "legislator")
        _unique_ids([item.id for item in self.motions], "motion")
        self.votes = _frozen(votes)
        self.legislators = list(self.legislators)
        self.motions = list(self.motions)

    @property
    def n(self) -> int:
        return self.votes.shape[0]

    @property
    def m(self) -> int:
        return self.votes.shape[1]

    @property
    def observed(self) -> np.ndarray:
        return self.votes != Vote.MISSING

    @property
    def yea(self) -> np.ndarray:
        return self.votes == Vote.YEA

    @property
    def legislator_ids(self) -> list[str]:
        return [item.id for item in self.legislators]

    @property
    def motion_ids(self) -> list[str]:
        return [item.id for item in self.motions]

    def legislator_index(self, legislator_id: str) -> int:
        for index, item in enumerate(self.legislators):
            if item.id == legislator_id:
                return index
        raise ValidationError(f"Unknown legislator id: {legislator_id}")

    def subset(self, rows: np.ndarray, columns: np.ndarray) -> RollCallMatrix:
        rows = np.asarray(rows, dtype=int)
        columns = np.asarray(columns, dtype=int)
        return RollCallMatrix(
            votes=self.votes[np.ix_(rows, columns)],
            legislators=[self.legislators[i] for i in rows],
            motions=[self.motions[j] for j in columns],
        )


@dataclass(slots=True)
class ModelParameters:
    mu: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray

    def __post_init__(self) -> None:
        mu = np.array(self.mu, dtype=float, copy=True).reshape(-1)
        alpha = np.array(self.alpha, dtype=float, copy=True)
        beta = np.array(self.beta, dtype=float, copy=True)
        if alpha.ndim == 1:
            alpha = alpha.reshape(-1, 1)
        if beta.ndim == 1:
            beta = beta.reshape(-1, 1)
        if alpha.shape[0] != mu.shape[0]:
            raise ValidationError(f"alpha has {alpha.shape[0]} rows but mu has {mu.shape[0]} entries")
        if alpha.shape[1] != beta.shape[1]:
            raise ValidationError(f"alpha has dimension {alpha.shape[1]} but beta has {beta.shape[1]}")
        if not (np.isfinite(mu).all() and np.isfinite(alpha).all() and np.isfinite(beta).all()):
            raise DomainError("Model parameters must be finite")
        self.mu = _frozen(mu)
        self.alpha = _frozen(alpha)
        self.beta = _frozen(beta)

    @property
    def d(self) -> int:
        return self.alpha.shape[1]

    def check_shapes(self, matrix: RollCallMatrix) -> None:
        if self.beta.shape[0] != matrix.n or self.mu.shape[0] != matrix.m:
            raise ValidationError(
                f"Parameters describe {self.beta.shape[0]}x{self.mu.shape[0]} but the matrix is {matrix.n}x{matrix.m}"
            )


@dataclass(slots=True)
class Hyperparameters:
    a: np.ndarray
    A: np.ndarray
    b: np.ndarray
    B: np.ndarray

    def __post_init__(self) -> None:
        self.a = _frozen(np.array(self.a, dtype=float, copy=True).reshape(-1))
        self.A = _frozen(np.array(self.A, dtype=float, copy=True))
        self.b = _frozen(np.atleast_2d(np.array(self.b, dtype=float, copy=True)))
        self.B = _frozen(np.array(self.B, dtype=float, copy=True))
        k = self.a.shape[0]
        if self.A.shape != (k, k):
            raise ValidationError(f"A must be {k}x{k}, got {self.A.shape}")
        n, d = self.b.shape
        if self.B.shape != (n, d, d):
            raise ValidationError(f"B must hold {n} matrices of size {d}x{d}, got {self.B.shape}")
        if k != d + 1:
            raise ValidationError(f"a has length {k} but ideal points have dimension {d}")
        if not is_positive_definite(self.A):
            raise DomainError("A must be symmetric positive definite")
        for index, block in enumerate(self.B):
            if not is_positive_definite(block):
                raise DomainError(f"B[{index}] must be symmetric positive definite")

    @property
    def n(self) -> int:
        return self.b.shape[0]

    @property
    def d(self) -> int:
        return self.b.shape[1]


@dataclass(slots=True)
class AnchorSpec:
    anchors: list[tuple[str, np.ndarray]] = field(default_factory=list)

    def __post_init__(self) -> None:
        self.anchors = [(str(legislator_id), np.array(position, dtype=float).reshape(-1)) for legislator_id, position in self.anchors]

    @property
    def count(self) -> int:
        return len(self.anchors)

    @property
    def ids(self) -> list[str]:
        return [legislator_id for legislator_id, _ in self.anchors]

    def positions(self) -> np.ndarray:
        if not self.anchors:
            return np.zeros((0, 0))
        return np.vstack([position for _, position in self.anchors])

    def as_dict(self) -> dict[str, list[float]]:
        return {legislator_id: position.tolist() for legislator_id, position in self.anchors}


@dataclass(slots=True)
class PosteriorDraws:
    """Retained draws stacked as (chain, draw, ...) arrays."""

    mu: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray
    legislator_ids: list[str]
    motion_ids: list[str]
    config: SamplerConfig
    iterations: np.ndarray
    anchors: dict[str, list[float]] = field(default_factory=dict)
    delta: np.ndarray | None = None
    group_indicator: np.ndarray | None = None
    wall_time_seconds: float = 0.0
    note: str = GIBBS_NOTE
    jitter_events: int = 0
    final_latents: np.ndarray | None = None

    @property
    def chains(self) -> int:
        return self.mu.shape[0]

    @property
    def draws_per_chain(self) -> int:
        return self.mu.shape[1]

    @property
    def total_draws(self) -> int:
        return self.chains * self.draws_per_chain

    @property
    def n(self) -> int:
        return self.beta.shape[2]

    @property
    def m(self) -> int:
        return self.mu.shape[2]

    @property
    def d(self) -> int:
        return self.beta.shape[3]

    def pooled(self, block: str) -> np.ndarray:
        values = getattr(self, block)
        if values is None:
            raise ValidationError(f"Draws carry no '{block}' block")
        return values.reshape((self.total_draws, *values.shape[2:]))

    def parameters_at(self, chain: int, draw: int) -> ModelParameters:
        return ModelParameters(mu=self.mu[chain, draw], alpha=self.alpha[chain, draw], beta=self.beta[chain, draw])

    def replace(self, **changes: object) -> PosteriorDraws:
        return replace(self, **changes)

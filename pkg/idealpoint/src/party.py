"""Party-influence extension: a motion-specific incentive for members of one group."""

from __future__ import annotations

import logging
from pathlib import Path

import numpy as np

from idealpoint.src.analytics import closed_votes, select, summarize
from idealpoint.src.errors import ValidationError
from idealpoint.src.importer import load_group_mapping
from idealpoint.src.models import AnchorSpec, Hyperparameters, PosteriorDraws, RollCallMatrix
from idealpoint.src.sampler import CovariatePrior, run_augmented_gibbs
from idealpoint.src.schemas import PartyEffectReport, PartyEffectRow, SamplerConfig


logger = logging.getLogger(__name__)

ALIGNMENT_CAVEAT_THRESHOLD = 0.9


def _check_indicator(matrix: RollCallMatrix, indicator: np.ndarray) -> np.ndarray:
    indicator = np.asarray(indicator).reshape(-1)
    if indicator.shape[0] != matrix.n:
        raise ValidationError(f"Group indicator has {indicator.shape[0]} entries for {matrix.n} legislators")
    if not np.isin(indicator, [0, 1]).all():
        raise ValidationError("Group indicator entries must be 0 or 1")
    if np.all(indicator == indicator[0]):
        raise ValidationError("Every legislator has the same group indicator; the party incentive is unidentified")
    return indicator.astype(np.int8)


def resolve_group_indicator(
    matrix: RollCallMatrix,
    source: str = "metadata",
    value: str = "1",
    mapping_path: str | Path | None = None,
) -> np.ndarray:
    """Binary D vector: 1 where a legislator's group label equals ``value``."""
    if source == "metadata":
        labels = [legislator.group for legislator in matrix.legislators]
    elif source == "file":
        if mapping_path is None:
            raise ValidationError("party.mapping_path is required when the group source is 'file'")
        mapping = load_group_mapping(mapping_path)
        missing = [legislator_id for legislator_id in matrix.legislator_ids if legislator_id not in mapping]
        if missing:
            raise ValidationError(f"Group mapping has no entry for: {', '.join(missing[:5])}")
        labels = [mapping[legislator_id] for legislator_id in matrix.legislator_ids]
    else:
        raise ValidationError(f"Unknown group source: {source}")
    indicator = np.array([1 if label == value else 0 for label in labels], dtype=np.int8)
    return _check_indicator(matrix, indicator)


def run_gibbs_party(
    matrix: RollCallMatrix,
    hyper: Hyperparameters,
    anchors: AnchorSpec,
    indicator: np.ndarray,
    config: SamplerConfig,
    delta_prior: tuple[float, float] = (0.0, 25.0),
) -> PosteriorDraws:
    """Gibbs sampler whose item step draws (mu_j, alpha_j, delta_j) on design rows (1, beta_i, D_i)."""
    if config.d != 1:
        raise ValidationError(f"The party extension is one-dimensional (got d={config.d})")
    indicator = _check_indicator(matrix, indicator)
    mean, variance = delta_prior
    if not np.isfinite(mean) or not np.isfinite(variance) or variance <= 0:
        raise ValidationError(f"delta prior needs a finite mean and positive variance (got {delta_prior})")

    prior = CovariatePrior(mean=np.array([mean], dtype=float), variance=np.array([variance], dtype=float))
    draws, extra = run_augmented_gibbs(
        matrix,
        hyper,
        anchors,
        config,
        covariates=indicator.astype(float)[:, np.newaxis],
        covariate_prior=prior,
    )
    return draws.replace(delta=extra[..., 0], group_indicator=indicator)


def _alignment(draws: PosteriorDraws) -> float:
    beta_means = draws.pooled("beta")[:, :, 0].mean(axis=0)
    indicator = np.asarray(draws.group_indicator, dtype=float)
    if np.ptp(beta_means) == 0:
        return 0.0
    return float(np.corrcoef(beta_means, indicator)[0, 1])


def party_effect_report(
    draws: PosteriorDraws,
    matrix: RollCallMatrix | None = None,
    level: float = 0.95,
) -> PartyEffectReport:
    if draws.delta is None or draws.group_indicator is None:
        raise ValidationError("Draws carry no party incentive block; fit with the party extension enabled")
    summaries = {row.index: row for row in select(summarize(draws, level), "delta")}
    closed = dict(zip(matrix.motion_ids, closed_votes(matrix).tolist())) if matrix is not None else {}

    rows: list[PartyEffectRow] = []
    for motion_id in draws.motion_ids:
        summary = summaries[motion_id]
        if summary.ci_lower > 0:
            direction = "favor-group"
        elif summary.ci_upper < 0:
            direction = "against-group"
        else:
            direction = "none"
        rows.append(
            PartyEffectRow(
                motion_id=motion_id,
                mean=summary.mean,
                sd=summary.sd,
                ci_lower=summary.ci_lower,
                ci_upper=summary.ci_upper,
                significant=summary.significant,
                direction=direction,
                closed_vote=bool(closed.get(motion_id, False)),
            )
        )

    caveat = None
    alignment = _alignment(draws)
    if abs(alignment) > ALIGNMENT_CAVEAT_THRESHOLD:
        caveat = (
            f"Ideal points correlate with the group indicator at {alignment:.2f}; "
            "party incentives and ideological positions are weakly separated in this fit."
        )
        logger.warning(caveat)

    return PartyEffectReport(
        rows=rows,
        significant_count=sum(row.significant for row in rows),
        closed_vote_count=sum(row.closed_vote for row in rows),
        closed_vote_significant_count=sum(row.closed_vote and row.significant for row in rows),
        identification_caveat=caveat,
    )

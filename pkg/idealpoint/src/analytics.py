"""Posterior summaries, dimension diagnostics, pivot ranks and posterior predictive checks."""

from __future__ import annotations

from collections.abc import Callable, Sequence
import logging

import numpy as np
from scipy.special import ndtr

from idealpoint.src.errors import UnsupportedOperationError, ValidationError
from idealpoint.src.models import PosteriorDraws, RollCallMatrix
from idealpoint.src.schemas import (
    BUILTIN_PPC_STATISTICS,
    DiscriminationReport,
    GroupSummaryRow,
    MetadataBreakdownRow,
    ParameterSummary,
    PivotReport,
    PPCReport,
    RecoveryReport,
)


logger = logging.getLogger(__name__)

MIN_SUMMARY_DRAWS = 100
MIN_PPC_DRAWS = 200
CLOSE_MARGIN = (0.35, 0.65)
QUANTILE_METHOD = "linear"

Statistic = Callable[[np.ndarray, np.ndarray], float]


def equal_tailed_interval(values: np.ndarray, level: float) -> tuple[float, float]:
    """Quantiles (1-level)/2 and (1+level)/2 with linear interpolation between order statistics."""
    if not 0.0 < level < 1.0:
        raise ValidationError(f"Credible level must lie in (0, 1) (got {level})")
    tail = (1.0 - level) / 2.0
    lower, upper = np.quantile(np.asarray(values, dtype=float), [tail, 1.0 - tail], method=QUANTILE_METHOD)
    return float(lower), float(upper)


def _excludes_zero(lower: np.ndarray | float, upper: np.ndarray | float) -> np.ndarray | bool:
    return (np.asarray(lower) > 0) | (np.asarray(upper) < 0)


def _block_summaries(
    parameter: str,
    pooled: np.ndarray,
    ids: list[str],
    level: float,
    vector: bool,
) -> list[ParameterSummary]:
    tail = (1.0 - level) / 2.0
    values = pooled if pooled.ndim == 3 else pooled[:, :, np.newaxis]
    means = values.mean(axis=0)
    sds = values.std(axis=0)
    lower, upper = np.quantile(values, [tail, 1.0 - tail], axis=0, method=QUANTILE_METHOD)
    # Linear interpolation can land a hair outside [min, max] of nearly constant draws.
    lower = np.minimum(lower, means)
    upper = np.maximum(upper, means)
    significant = _excludes_zero(lower, upper)

    rows: list[ParameterSummary] = []
    for index, identifier in enumerate(ids):
        for k in range(values.shape[2]):
            rows.append(
                ParameterSummary(
                    parameter=parameter,
                    index=identifier,
                    dimension=k + 1 if vector else 0,
                    mean=float(means[index, k]),
                    sd=float(sds[index, k]),
                    ci_lower=float(lower[index, k]),
                    ci_upper=float(upper[index, k]),
                    level=level,
                    significant=bool(significant[index, k]),
                )
            )
    return rows


def summarize(draws: PosteriorDraws, level: float = 0.95) -> list[ParameterSummary]:
    if not 0.0 < level < 1.0:
        raise ValidationError(f"Credible level must lie in (0, 1) (got {level})")
    if draws.total_draws < MIN_SUMMARY_DRAWS:
        raise ValidationError(
            f"Summaries need at least {MIN_SUMMARY_DRAWS} retained draws, got {draws.total_draws}"
        )
    rows = _block_summaries("mu", draws.pooled("mu"), draws.motion_ids, level, vector=False)
    rows += _block_summaries("alpha", draws.pooled("alpha"), draws.motion_ids, level, vector=True)
    rows += _block_summaries("beta", draws.pooled("beta"), draws.legislator_ids, level, vector=True)
    if draws.delta is not None:
        rows += _block_summaries("delta", draws.pooled("delta"), draws.motion_ids, level, vector=False)
    return rows


def select(summaries: Sequence[ParameterSummary], parameter: str) -> list[ParameterSummary]:
    return [row for row in summaries if row.parameter == parameter]


def _significant_motions(summaries: Sequence[ParameterSummary]) -> dict[str, bool]:
    flags: dict[str, bool] = {}
    for row in select(summaries, "alpha"):
        flags[row.index] = flags.get(row.index, False) or row.significant
    return flags


def discrimination_significance(summaries: Sequence[ParameterSummary]) -> DiscriminationReport:
    alpha_rows = select(summaries, "alpha")
    flags = _significant_motions(alpha_rows)
    d = max((row.dimension for row in alpha_rows), default=0)
    per_dimension = [sum(1 for row in alpha_rows if row.dimension == k and row.significant) for k in range(1, d + 1)]
    significant = [motion_id for motion_id, flag in flags.items() if flag]
    total = len(flags)
    return DiscriminationReport(
        count_significant=len(significant),
        total=total,
        fraction=len(significant) / total if total else 0.0,
        per_dimension=per_dimension,
        significant_motions=significant,
    )


def pivot_analysis(draws: PosteriorDraws, ranks: Sequence[int]) -> list[PivotReport]:
    """Occupancy of each requested order statistic of the sorted ideal points (rank 1 = leftmost)."""
    if draws.d != 1:
        raise UnsupportedOperationError(
            f"Pivot analysis needs a total order; project the d={draws.d} ideal points onto one dimension first"
        )
    n = draws.n
    for rank in ranks:
        if not 1 <= rank <= n:
            raise ValidationError(f"Rank {rank} is outside 1..{n}")

    values = draws.pooled("beta")[:, :, 0]
    total = values.shape[0]
    id_order = np.argsort(np.argsort(np.asarray(draws.legislator_ids, dtype=object), kind="stable"), kind="stable")
    tie_key = np.broadcast_to(id_order, values.shape)
    order = np.lexsort((tie_key, values), axis=-1)
    ordered = np.take_along_axis(values, order, axis=1)
    ties = int((np.diff(ordered, axis=1) == 0).any(axis=1).sum())
    if ties:
        logger.info("Broke ties by legislator id in %d of %d draws", ties, total)

    reports: list[PivotReport] = []
    for rank in ranks:
        tallies = np.bincount(order[:, rank - 1], minlength=n)
        occupied = np.flatnonzero(tallies)
        occupied = occupied[np.argsort(-tallies[occupied], kind="stable")]
        reports.append(
            PivotReport(
                rank=rank,
                occupancy={draws.legislator_ids[i]: float(tallies[i] / total) for i in occupied},
                counts={draws.legislator_ids[i]: int(tallies[i]) for i in occupied},
                draws_used=total,
                ties=ties,
            )
        )
    return reports


def _yea_rate(yea: np.ndarray, observed: np.ndarray) -> float:
    return float(yea[observed].mean())


def _legislator_yea_rate_sd(yea: np.ndarray, observed: np.ndarray) -> float:
    counts = observed.sum(axis=1)
    rates = (yea & observed).sum(axis=1)[counts > 0] / counts[counts > 0]
    return float(rates.std())


def _close_margin_fraction(yea: np.ndarray, observed: np.ndarray) -> float:
    counts = observed.sum(axis=0)
    shares = (yea & observed).sum(axis=0)[counts > 0] / counts[counts > 0]
    low, high = CLOSE_MARGIN
    return float(((shares >= low) & (shares <= high)).mean())


PPC_STATISTICS: dict[str, Statistic] = {
    "yea_rate": _yea_rate,
    "legislator_yea_rate_sd": _legislator_yea_rate_sd,
    "close_margin_fraction": _close_margin_fraction,
}


def closed_votes(matrix: RollCallMatrix) -> np.ndarray:
    """Mask of motions whose yea share among voters lies in the close-margin band."""
    counts = matrix.observed.sum(axis=0)
    shares = np.divide(
        (matrix.yea & matrix.observed).sum(axis=0),
        counts,
        out=np.zeros(matrix.m),
        where=counts > 0,
    )
    low, high = CLOSE_MARGIN
    return (counts > 0) & (shares >= low) & (shares <= high)


def _check_alignment(draws: PosteriorDraws, matrix: RollCallMatrix) -> None:
    if draws.legislator_ids != matrix.legislator_ids or draws.motion_ids != matrix.motion_ids:
        raise ValidationError("Draws and roll-call matrix describe different legislators or motions")


def posterior_predictive_check(
    draws: PosteriorDraws,
    matrix: RollCallMatrix,
    statistics: Sequence[str] | None = None,
    replicates: int = MIN_PPC_DRAWS,
    seed: int = 0,
) -> list[PPCReport]:
    """p-value convention: share of replicated statistics greater than or equal to the observed one."""
    names = list(statistics) if statistics is not None else list(BUILTIN_PPC_STATISTICS)
    unknown = [name for name in names if name not in PPC_STATISTICS]
    if unknown:
        raise ValidationError(
            f"Unknown PPC statistics: {', '.join(unknown)}; choose from {', '.join(PPC_STATISTICS)}"
        )
    if draws.total_draws < MIN_PPC_DRAWS:
        raise ValidationError(f"Posterior predictive checks need at least {MIN_PPC_DRAWS} retained draws")
    if replicates < MIN_PPC_DRAWS:
        raise ValidationError(f"Posterior predictive checks need at least {MIN_PPC_DRAWS} replicates")
    _check_alignment(draws, matrix)

    rng = np.random.default_rng(seed)
    picks = np.linspace(0, draws.total_draws - 1, replicates).round().astype(int)
    mu = draws.pooled("mu")
    alpha = draws.pooled("alpha")
    beta = draws.pooled("beta")
    delta = draws.pooled("delta") if draws.delta is not None else None
    indicator = None if draws.group_indicator is None else np.asarray(draws.group_indicator, dtype=float)

    observed = matrix.observed
    actual = {name: PPC_STATISTICS[name](matrix.yea, observed) for name in names}
    replicated = {name: np.empty(replicates) for name in names}
    for slot, pick in enumerate(picks):
        theta = mu[pick][np.newaxis, :] + beta[pick] @ alpha[pick].T
        if delta is not None and indicator is not None:
            theta = theta + np.outer(indicator, delta[pick])
        simulated = rng.random(theta.shape) < ndtr(theta)
        for name in names:
            replicated[name][slot] = PPC_STATISTICS[name](simulated, observed)

    reports: list[PPCReport] = []
    for name in names:
        values = replicated[name]
        p_value = float(np.mean(values >= actual[name]))
        reports.append(
            PPCReport(statistic_name=name, observed=actual[name], predictive_draws=values.tolist(), p_value=p_value)
        )
        if reports[-1].extreme:
            logger.warning("Posterior predictive p-value for %s is extreme (%.3f)", name, p_value)
    return reports


def recovery_correlation(estimate: np.ndarray, truth: np.ndarray) -> RecoveryReport:
    """Sign-aligned Pearson correlation between estimated and true coordinates."""
    estimate = np.asarray(estimate, dtype=float).reshape(-1)
    truth = np.asarray(truth, dtype=float).reshape(-1)
    if estimate.shape != truth.shape:
        raise ValidationError(f"Cannot compare {estimate.size} estimates with {truth.size} true values")
    if estimate.size < 3:
        raise ValidationError("Recovery correlation needs at least 3 values")
    if np.ptp(estimate) == 0 or np.ptp(truth) == 0:
        raise ValidationError("Recovery correlation is undefined for constant inputs")
    raw = float(np.corrcoef(estimate, truth)[0, 1])
    return RecoveryReport(correlation=abs(raw), sign=1 if raw >= 0 else -1, compared=int(estimate.size))


def parameter_count(n_free: int, m: int, d: int, party: bool = False) -> int:
    count = n_free * d + m * (d + 1)
    return count + m if party else count


def group_ideal_point_summary(
    summaries: Sequence[ParameterSummary],
    matrix: RollCallMatrix,
    dimension: int = 1,
) -> list[GroupSummaryRow]:
    by_id = {row.index: row for row in select(summaries, "beta") if row.dimension == dimension}
    groups: dict[str, list[ParameterSummary]] = {}
    for legislator in matrix.legislators:
        if legislator.id in by_id:
            groups.setdefault(legislator.party or "unknown", []).append(by_id[legislator.id])

    rows: list[GroupSummaryRow] = []
    for party in sorted(groups):
        members = groups[party]
        count = len(members)
        rows.append(
            GroupSummaryRow(
                party=party,
                legislators=count,
                mean_ideal_point=float(np.mean([row.mean for row in members])),
                significant_share=sum(row.significant for row in members) / count,
                positive_significant_share=sum(row.ci_lower > 0 for row in members) / count,
                negative_significant_share=sum(row.ci_upper < 0 for row in members) / count,
            )
        )
    return rows


def discrimination_by_metadata(
    summaries: Sequence[ParameterSummary],
    matrix: RollCallMatrix,
    key: str = "topic",
) -> list[MetadataBreakdownRow]:
    if key not in ("topic", "sponsor_flag"):
        raise ValidationError(f"Cannot break motions down by '{key}'; use topic or sponsor_flag")
    flags = _significant_motions(summaries)
    total_significant = sum(flags.values())

    tallies: dict[str, list[int]] = {}
    for motion in matrix.motions:
        if motion.id not in flags:
            continue
        value = getattr(motion, key)
        category = "unknown" if value is None else str(value)
        counts = tallies.setdefault(category, [0, 0])
        counts[0] += 1
        counts[1] += int(flags[motion.id])

    return [
        MetadataBreakdownRow(
            key=key,
            category=category,
            motions=motions,
            significant=significant,
            share_of_significant=significant / total_significant if total_significant else 0.0,
        )
        for category, (motions, significant) in sorted(tallies.items())
    ]

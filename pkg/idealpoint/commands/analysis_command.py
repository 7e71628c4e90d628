"""summarize, pivots, ppc and diagnose over a fitted draws directory."""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass
import logging
from pathlib import Path

from idealpoint.src.analytics import (
    discrimination_by_metadata,
    discrimination_significance,
    group_ideal_point_summary,
    pivot_analysis,
    posterior_predictive_check,
    recovery_correlation,
    select,
    summarize,
)
from idealpoint.src.diagnostics import convergence_diagnostics, share_converged
from idealpoint.src.errors import ValidationError
from idealpoint.src.exporter import (
    ideal_points_plot_frame,
    load_draws,
    load_truth_beta,
    pivots_frame,
    ppc_frame,
    read_manifest,
    write_frame,
    write_json,
    write_rows,
)
from idealpoint.src.importer import attach_motion_metadata, load_motion_metadata, load_roll_calls
from idealpoint.src.models import PosteriorDraws, RollCallMatrix
from idealpoint.src.schemas import (
    ConvergenceRow,
    DiscriminationReport,
    ParameterSummary,
    PivotReport,
    PPCReport,
    RecoveryReport,
)


logger = logging.getLogger(__name__)

FILTERED_VOTES = "filtered_votes.csv"
FILTERED_MOTIONS = "filtered_motions.csv"
TRUTH_BETA = "truth_beta.csv"


@dataclass(slots=True)
class SummaryArtifacts:
    summaries: list[ParameterSummary]
    discrimination: DiscriminationReport
    recovery: RecoveryReport | None = None


def load_filtered_matrix(directory: Path) -> RollCallMatrix | None:
    votes = directory / FILTERED_VOTES
    if not votes.is_file():
        return None
    matrix = load_roll_calls(votes, "csv")
    motions = directory / FILTERED_MOTIONS
    if motions.is_file():
        matrix = attach_motion_metadata(matrix, load_motion_metadata(motions))
    return matrix


def _default_truth(directory: Path) -> Path | None:
    manifest = read_manifest(directory)
    if manifest.data_path is None:
        return None
    candidate = Path(manifest.data_path).parent / TRUTH_BETA
    return candidate if candidate.is_file() else None


def write_recovery(draws: PosteriorDraws, truth_path: Path, out: Path) -> RecoveryReport:
    truth = load_truth_beta(truth_path, draws.legislator_ids)
    estimate = draws.pooled("beta").mean(axis=0)
    free = [index for index, legislator_id in enumerate(draws.legislator_ids) if legislator_id not in draws.anchors]
    report = recovery_correlation(estimate[free, 0], truth[free, 0])
    write_json(report, out / "recovery.json")
    logger.info("Recovery correlation %.3f over %d free legislators", report.correlation, report.compared)
    return report


def write_summary_artifacts(
    draws: PosteriorDraws,
    matrix: RollCallMatrix | None,
    out: Path,
    level: float,
    truth_path: Path | None = None,
) -> SummaryArtifacts:
    summaries = summarize(draws, level)
    write_rows(summaries, out / "summary.csv")
    discrimination = discrimination_significance(summaries)
    payload: dict[str, object] = {"report": discrimination.model_dump(mode="json")}

    if matrix is not None:
        write_frame(ideal_points_plot_frame(summaries, matrix), out / "ideal_points_plot.csv")
        write_rows(group_ideal_point_summary(summaries, matrix), out / "group_summary.csv")
        for key in ("topic", "sponsor_flag"):
            rows = discrimination_by_metadata(summaries, matrix, key)
            payload[f"by_{key}"] = [row.model_dump(mode="json") for row in rows]
    write_json(payload, out / "discrimination.json")
    logger.info(
        "%d of %d motions discriminate (%.1f%%)",
        discrimination.count_significant,
        discrimination.total,
        100.0 * discrimination.fraction,
    )

    recovery = write_recovery(draws, truth_path, out) if truth_path is not None else None
    return SummaryArtifacts(summaries=summaries, discrimination=discrimination, recovery=recovery)


def run_summarize(
    draws_dir: str | Path,
    *,
    out: str | Path | None = None,
    level: float = 0.95,
    truth_path: str | Path | None = None,
) -> SummaryArtifacts:
    source = Path(draws_dir)
    target = Path(out) if out is not None else source
    draws = load_draws(source)
    truth = Path(truth_path) if truth_path is not None else _default_truth(source)
    if truth is not None and not truth.is_file():
        raise ValidationError(f"Truth file not found: {truth}")
    artifacts = write_summary_artifacts(draws, load_filtered_matrix(source), target, level, truth)
    beta_rows = select(artifacts.summaries, "beta")
    if beta_rows:
        means = [row.mean for row in beta_rows if row.dimension == 1]
        logger.info("Ideal points span [%.2f, %.2f]", min(means), max(means))
    return artifacts


def run_pivots(draws_dir: str | Path, ranks: Sequence[int], *, out: str | Path | None = None) -> list[PivotReport]:
    source = Path(draws_dir)
    reports = pivot_analysis(load_draws(source), ranks)
    write_frame(pivots_frame(reports), Path(out if out is not None else source) / "pivots.csv")
    return reports


def run_ppc(
    draws_dir: str | Path,
    *,
    data_path: str | Path | None = None,
    statistics: Sequence[str] | None = None,
    replicates: int = 200,
    seed: int | None = None,
    out: str | Path | None = None,
) -> list[PPCReport]:
    source = Path(draws_dir)
    draws = load_draws(source)
    if data_path is not None:
        matrix = load_roll_calls(data_path, "csv")
    else:
        matrix = load_filtered_matrix(source)
        if matrix is None:
            raise ValidationError(f"No {FILTERED_VOTES} in {source}; pass the analysed vote file explicitly")
    reports = posterior_predictive_check(
        draws,
        matrix,
        statistics,
        replicates=replicates,
        seed=draws.config.seed if seed is None else seed,
    )
    write_frame(ppc_frame(reports), Path(out if out is not None else source) / "ppc.csv")
    return reports


def run_diagnose(draws_dir: str | Path, *, out: str | Path | None = None) -> list[ConvergenceRow]:
    source = Path(draws_dir)
    rows = convergence_diagnostics(load_draws(source))
    write_rows(rows, Path(out if out is not None else source) / "convergence.csv")
    logger.info("%.1f%% of parameters have split R-hat below 1.1", 100.0 * share_converged(rows))
    return rows

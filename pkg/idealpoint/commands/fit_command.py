"""fit: load, filter, sample, orient, summarize and persist a full run."""

from __future__ import annotations

from dataclasses import dataclass
import logging
from pathlib import Path

from idealpoint.commands.analysis_command import (
    FILTERED_MOTIONS,
    FILTERED_VOTES,
    TRUTH_BETA,
    SummaryArtifacts,
    write_summary_artifacts,
)
from idealpoint.src.analytics import MIN_PPC_DRAWS, parameter_count, pivot_analysis, posterior_predictive_check
from idealpoint.src.diagnostics import convergence_diagnostics
from idealpoint.src.errors import ValidationError
from idealpoint.src.exporter import (
    build_manifest,
    pivots_frame,
    ppc_frame,
    write_draws,
    write_frame,
    write_json,
    write_manifest,
    write_motion_metadata_csv,
    write_roll_calls_csv,
    write_rows,
)
from idealpoint.src.filtering import filter_matrix
from idealpoint.src.identify import build_anchor_spec, orient_draws, validate_anchors
from idealpoint.src.importer import attach_motion_metadata, load_motion_metadata, load_roll_calls
from idealpoint.src.models import PosteriorDraws, RollCallMatrix
from idealpoint.src.party import party_effect_report, resolve_group_indicator, run_gibbs_party
from idealpoint.src.probit import default_hyperparameters
from idealpoint.src.sampler import run_gibbs
from idealpoint.src.schemas import FilterReport, RunConfig, RunManifest, SamplerConfig


logger = logging.getLogger(__name__)


@dataclass(slots=True)
class FitResult:
    output_dir: Path
    matrix: RollCallMatrix
    filter_report: FilterReport
    draws: PosteriorDraws
    summary: SummaryArtifacts
    manifest: RunManifest


def _load_matrix(config: RunConfig) -> RollCallMatrix:
    matrix = load_roll_calls(config.data.path, config.data.format)
    if config.data.motions_path:
        matrix = attach_motion_metadata(matrix, load_motion_metadata(config.data.motions_path))
    return matrix


def _sampler_config(config: RunConfig) -> SamplerConfig:
    return SamplerConfig(
        iterations=config.sampler.iterations,
        burn_in=config.sampler.burn_in,
        thin=config.sampler.thin,
        chains=config.sampler.chains,
        seed=config.sampler.seed,
        d=config.model.dimensions,
        threads=config.threads,
    )


def _sample(config: RunConfig, matrix: RollCallMatrix) -> PosteriorDraws:
    d = config.model.dimensions
    anchors = build_anchor_spec(config.anchors)
    validate_anchors(matrix, anchors, d)
    hyper = default_hyperparameters(matrix.n, d, config.model.sigma2)
    sampler = _sampler_config(config)
    if not config.party.enabled:
        return run_gibbs(matrix, hyper, anchors, sampler)
    indicator = resolve_group_indicator(
        matrix,
        config.party.group_source,
        config.party.group_value,
        config.party.mapping_path,
    )
    return run_gibbs_party(
        matrix,
        hyper,
        anchors,
        indicator,
        sampler,
        delta_prior=(config.party.delta_prior_mean, config.party.delta_prior_variance),
    )


def _write_optional_reports(config: RunConfig, draws: PosteriorDraws, matrix: RollCallMatrix, out: Path) -> None:
    try:
        write_rows(convergence_diagnostics(draws), out / "convergence.csv")
    except ValidationError as exc:
        logger.warning("Skipping convergence diagnostics: %s", exc.detail)

    if config.analysis.ranks:
        if draws.d == 1:
            write_frame(pivots_frame(pivot_analysis(draws, config.analysis.ranks)), out / "pivots.csv")
        else:
            logger.warning("Skipping pivot analysis for d=%d", draws.d)

    if draws.total_draws >= MIN_PPC_DRAWS:
        reports = posterior_predictive_check(
            draws,
            matrix,
            config.analysis.ppc_statistics,
            replicates=config.analysis.ppc_replicates,
            seed=config.sampler.seed,
        )
        write_frame(ppc_frame(reports), out / "ppc.csv")
    else:
        logger.warning("Skipping posterior predictive checks: %d draws < %d", draws.total_draws, MIN_PPC_DRAWS)

    if draws.delta is not None:
        report = party_effect_report(draws, matrix, config.analysis.ci_level)
        write_rows(report.rows, out / "party_effects.csv")
        write_json(report.model_copy(update={"rows": []}), out / "party_summary.json")


def run_fit(config: RunConfig) -> FitResult:
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)

    matrix, filter_report = filter_matrix(
        _load_matrix(config),
        config.filter.min_participation,
        config.filter.drop_unanimous,
        config.filter.until_stable,
    )
    write_json(filter_report, out / "filter_report.json")
    write_roll_calls_csv(matrix, out / FILTERED_VOTES)
    write_motion_metadata_csv(matrix, out / FILTERED_MOTIONS)

    draws = _sample(config, matrix)
    if config.analysis.orientation is not None:
        draws = orient_draws(draws, config.analysis.orientation.reference, config.analysis.orientation.signs)
    write_draws(draws, out)

    truth = Path(config.data.path).parent / TRUTH_BETA
    summary = write_summary_artifacts(
        draws,
        matrix,
        out,
        config.analysis.ci_level,
        truth if truth.is_file() else None,
    )
    _write_optional_reports(config, draws, matrix, out)

    count = parameter_count(draws.n - len(draws.anchors), draws.m, draws.d, party=draws.delta is not None)
    manifest = build_manifest(
        command="fit",
        config=config.model_dump(mode="json"),
        draws=draws,
        parameter_count=count,
        data_path=config.data.path,
    )
    manifest = write_manifest(manifest, out)
    logger.info("Estimated %d parameters; artifacts written to %s", count, out)
    return FitResult(
        output_dir=out,
        matrix=matrix,
        filter_report=filter_report,
        draws=draws,
        summary=summary,
        manifest=manifest,
    )

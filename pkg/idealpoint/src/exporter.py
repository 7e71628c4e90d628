"""Run artifact persistence: draw tables, reports, synthetic truth and the run manifest."""

from __future__ import annotations

from collections.abc import Iterable, Sequence
from datetime import UTC, datetime
import hashlib
import json
import logging
from pathlib import Path
from typing import Any

import numpy as np
import pandas as pd
from pydantic import BaseModel

from idealpoint.src.analytics import select
from idealpoint.src.errors import ValidationError
from idealpoint.src.models import ModelParameters, PosteriorDraws, RollCallMatrix, Vote
from idealpoint.src.schemas import (
    ErrorResponse,
    ParameterSummary,
    PivotReport,
    PPCReport,
    RunManifest,
    SamplerConfig,
)


logger = logging.getLogger(__name__)

MANIFEST_VERSION = "1.0.0"
GENERATED_BY = "idealpoint"
DRAW_COLUMNS = ["chain", "iteration", "index", "dimension", "value"]
TRUTH_COLUMNS = ["index", "dimension", "value"]
DRAW_BLOCKS = ("mu", "alpha", "beta", "delta")
VECTOR_BLOCKS = {"alpha", "beta"}


def _utc_now_iso() -> str:
    return datetime.now(UTC).replace(microsecond=0).isoformat().replace("+00:00", "Z")


def _ensure_dir(directory: str | Path) -> Path:
    path = Path(directory)
    path.mkdir(parents=True, exist_ok=True)
    return path


def file_digest(path: str | Path) -> str:
    digest = hashlib.sha256()
    with Path(path).open("rb") as handle:
        for chunk in iter(lambda: handle.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def config_digest(config: dict[str, Any]) -> str:
    canonical = json.dumps(config, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def write_json(payload: BaseModel | dict[str, Any] | list[Any], path: str | Path) -> Path:
    target = Path(path)
    _ensure_dir(target.parent)
    data = payload.model_dump(mode="json") if isinstance(payload, BaseModel) else payload
    target.write_text(json.dumps(data, ensure_ascii=False, indent=2), encoding="utf-8")
    return target


def write_rows(rows: Iterable[BaseModel], path: str | Path, columns: Sequence[str] | None = None) -> Path:
    target = Path(path)
    _ensure_dir(target.parent)
    frame = pd.DataFrame([row.model_dump(mode="json") for row in rows], columns=columns)
    frame.to_csv(target, index=False)
    return target


def write_roll_calls_csv(matrix: RollCallMatrix, path: str | Path) -> Path:
    """Write a matrix in the loader's CSV schema; Missing cells become NA."""
    target = Path(path)
    _ensure_dir(target.parent)
    tokens = np.where(matrix.votes == Vote.MISSING, "NA", matrix.votes.astype(str))
    frame = pd.DataFrame(tokens, columns=matrix.motion_ids)
    named = any(legislator.name != legislator.id for legislator in matrix.legislators)
    meta = {
        "legislator_id": matrix.legislator_ids,
        "party": [legislator.party for legislator in matrix.legislators],
        "group": [legislator.group or "" for legislator in matrix.legislators],
    }
    if named:
        meta["name"] = [legislator.name for legislator in matrix.legislators]
    pd.concat([pd.DataFrame(meta), frame], axis=1).to_csv(target, index=False)
    return target


def write_motion_metadata_csv(matrix: RollCallMatrix, path: str | Path) -> Path:
    records = [
        {
            "id": motion.id,
            "label": motion.label or "",
            "topic": motion.topic or "",
            "sponsor_flag": "" if motion.sponsor_flag is None else str(motion.sponsor_flag),
        }
        for motion in matrix.motions
    ]
    return write_frame(pd.DataFrame(records, columns=["id", "label", "topic", "sponsor_flag"]), path)


def _draw_frame(values: np.ndarray, ids: list[str], iterations: np.ndarray, vector: bool) -> pd.DataFrame:
    if values.ndim == 3:
        values = values[..., np.newaxis]
    chains, draws, count, width = values.shape
    chain, draw, index, dimension = np.meshgrid(
        np.arange(chains), np.arange(draws), np.arange(count), np.arange(width), indexing="ij"
    )
    return pd.DataFrame(
        {
            "chain": chain.ravel(),
            "iteration": iterations[draw.ravel()],
            "index": np.asarray(ids, dtype=object)[index.ravel()],
            "dimension": dimension.ravel() + 1 if vector else np.zeros(values.size, dtype=int),
            "value": values.ravel(),
        }
    )


def write_draws(draws: PosteriorDraws, directory: str | Path) -> list[Path]:
    target = _ensure_dir(directory)
    written: list[Path] = []
    for block in DRAW_BLOCKS:
        values = getattr(draws, block)
        if values is None:
            continue
        ids = draws.legislator_ids if block == "beta" else draws.motion_ids
        path = target / f"{block}.csv"
        _draw_frame(values, ids, draws.iterations, block in VECTOR_BLOCKS).to_csv(path, index=False)
        written.append(path)
    return written


def read_manifest(directory: str | Path) -> RunManifest:
    path = Path(directory) / "manifest.json"
    if not path.is_file():
        raise ValidationError(f"No manifest.json in {directory}; point at a fit output directory")
    return RunManifest.model_validate_json(path.read_text(encoding="utf-8"))


def _read_block(path: Path, ids: list[str], chains: int, iterations: np.ndarray, vector: bool) -> np.ndarray:
    frame = pd.read_csv(path, dtype={"index": str})
    missing = [column for column in DRAW_COLUMNS if column not in frame.columns]
    if missing:
        raise ValidationError(f"{path.name} lacks columns: {', '.join(missing)}")
    width = int(frame["dimension"].max()) if vector else 1
    position = {identifier: slot for slot, identifier in enumerate(ids)}
    step = {int(iteration): slot for slot, iteration in enumerate(iterations)}
    if not set(frame["index"]).issubset(position):
        raise ValidationError(f"{path.name} names entities absent from the manifest")

    values = np.full((chains, iterations.size, len(ids), width), np.nan)
    rows = frame["chain"].to_numpy(dtype=int)
    draws = frame["iteration"].map(step).to_numpy()
    entities = frame["index"].map(position).to_numpy(dtype=int)
    dims = frame["dimension"].to_numpy(dtype=int) - 1 if vector else np.zeros(len(frame), dtype=int)
    if np.isnan(draws.astype(float)).any():
        raise ValidationError(f"{path.name} holds iterations not listed in the manifest")
    values[rows, draws.astype(int), entities, dims] = frame["value"].to_numpy(dtype=float)
    if np.isnan(values).any():
        raise ValidationError(f"{path.name} is incomplete")
    return values if vector else values[..., 0]


def load_draws(directory: str | Path) -> PosteriorDraws:
    source = Path(directory)
    manifest = read_manifest(source)
    iterations = np.arange(
        manifest.burn_in + manifest.thin, manifest.iterations + 1, manifest.thin
    )[: manifest.retained_draws]
    config = SamplerConfig(
        iterations=manifest.iterations,
        burn_in=manifest.burn_in,
        thin=manifest.thin,
        chains=manifest.chains,
        seed=manifest.seed,
        d=manifest.dimensions,
    )
    blocks: dict[str, np.ndarray] = {}
    for block in DRAW_BLOCKS:
        path = source / f"{block}.csv"
        if not path.is_file():
            if block == "delta":
                continue
            raise ValidationError(f"Missing draw file {path}")
        ids = manifest.legislator_ids if block == "beta" else manifest.motion_ids
        blocks[block] = _read_block(path, ids, manifest.chains, iterations, block in VECTOR_BLOCKS)

    indicator = None if manifest.group_indicator is None else np.asarray(manifest.group_indicator, dtype=np.int8)
    return PosteriorDraws(
        mu=blocks["mu"],
        alpha=blocks["alpha"],
        beta=blocks["beta"],
        legislator_ids=manifest.legislator_ids,
        motion_ids=manifest.motion_ids,
        config=config,
        iterations=iterations,
        anchors=manifest.anchors,
        delta=blocks.get("delta"),
        group_indicator=indicator,
        wall_time_seconds=manifest.wall_time_seconds,
        note=manifest.sampler_note,
        jitter_events=manifest.jitter_events,
    )


def write_truth(
    truth: ModelParameters,
    legislator_ids: list[str],
    motion_ids: list[str],
    directory: str | Path,
    delta: np.ndarray | None = None,
) -> list[Path]:
    target = _ensure_dir(directory)
    blocks = {
        "mu": (truth.mu[:, np.newaxis], motion_ids, False),
        "alpha": (truth.alpha, motion_ids, True),
        "beta": (truth.beta, legislator_ids, True),
    }
    if delta is not None:
        blocks["delta"] = (np.asarray(delta, dtype=float)[:, np.newaxis], motion_ids, False)
    written: list[Path] = []
    for block, (values, ids, vector) in blocks.items():
        count, width = values.shape
        frame = pd.DataFrame(
            {
                "index": np.repeat(np.asarray(ids, dtype=object), width),
                "dimension": np.tile(np.arange(1, width + 1), count) if vector else 0,
                "value": values.ravel(),
            }
        )
        path = target / f"truth_{block}.csv"
        frame.to_csv(path, index=False)
        written.append(path)
    return written


def load_truth_beta(path: str | Path, legislator_ids: list[str]) -> np.ndarray:
    frame = pd.read_csv(path, dtype={"index": str})
    missing = [column for column in TRUTH_COLUMNS if column not in frame.columns]
    if missing:
        raise ValidationError(f"{Path(path).name} lacks columns: {', '.join(missing)}")
    table = frame.pivot(index="index", columns="dimension", values="value")
    absent = [legislator_id for legislator_id in legislator_ids if legislator_id not in table.index]
    if absent:
        raise ValidationError(f"Truth file has no ideal point for: {', '.join(absent[:5])}")
    return table.loc[legislator_ids].to_numpy(dtype=float)


def ideal_points_plot_frame(summaries: Sequence[ParameterSummary], matrix: RollCallMatrix) -> pd.DataFrame:
    """Caterpillar-plot rows for dimension 1, ranked from lowest to highest posterior mean."""
    by_id = {row.index: row for row in select(summaries, "beta") if row.dimension == 1}
    records = [
        {
            "legislator_id": legislator.id,
            "party": legislator.party,
            "group": legislator.group or "",
            "mean": by_id[legislator.id].mean,
            "ci_lower": by_id[legislator.id].ci_lower,
            "ci_upper": by_id[legislator.id].ci_upper,
        }
        for legislator in matrix.legislators
        if legislator.id in by_id
    ]
    frame = pd.DataFrame(records).sort_values(["mean", "legislator_id"], kind="stable")
    frame["rank"] = np.arange(1, len(frame) + 1)
    return frame.reset_index(drop=True)


def pivots_frame(reports: Sequence[PivotReport]) -> pd.DataFrame:
    records = [
        {
            "rank": report.rank,
            "legislator_id": legislator_id,
            "count": report.counts[legislator_id],
            "occupancy": share,
            "draws_used": report.draws_used,
        }
        for report in reports
        for legislator_id, share in report.occupancy.items()
    ]
    return pd.DataFrame(records, columns=["rank", "legislator_id", "count", "occupancy", "draws_used"])


def ppc_frame(reports: Sequence[PPCReport]) -> pd.DataFrame:
    records = [
        {
            "statistic": report.statistic_name,
            "observed": report.observed,
            "replicate_mean": float(np.mean(report.predictive_draws)),
            "replicates": len(report.predictive_draws),
            "p_value": report.p_value,
            "extreme": report.extreme,
        }
        for report in reports
    ]
    return pd.DataFrame(records, columns=["statistic", "observed", "replicate_mean", "replicates", "p_value", "extreme"])


def write_frame(frame: pd.DataFrame, path: str | Path) -> Path:
    target = Path(path)
    _ensure_dir(target.parent)
    frame.to_csv(target, index=False)
    return target


def build_manifest(
    *,
    command: str,
    config: dict[str, Any],
    draws: PosteriorDraws,
    parameter_count: int,
    data_path: str | Path | None = None,
) -> RunManifest:
    data_digest = file_digest(data_path) if data_path is not None else None
    settings_digest = config_digest(config)
    run_digest = hashlib.sha256(f"{command}|{data_digest}|{settings_digest}".encode("utf-8")).hexdigest()
    return RunManifest(
        version=MANIFEST_VERSION,
        created=_utc_now_iso(),
        generated_by=GENERATED_BY,
        command=command,
        config=config,
        seed=draws.config.seed,
        chains=draws.chains,
        iterations=draws.config.iterations,
        burn_in=draws.config.burn_in,
        thin=draws.config.thin,
        retained_draws=draws.draws_per_chain,
        data_path=str(data_path) if data_path is not None else None,
        data_digest=data_digest,
        config_digest=settings_digest,
        run_digest=run_digest,
        n_legislators=draws.n,
        n_motions=draws.m,
        dimensions=draws.d,
        n_free_legislators=draws.n - len(draws.anchors),
        parameter_count=parameter_count,
        legislator_ids=draws.legislator_ids,
        motion_ids=draws.motion_ids,
        anchors=draws.anchors,
        group_indicator=None if draws.group_indicator is None else [int(v) for v in draws.group_indicator],
        wall_time_seconds=draws.wall_time_seconds,
        sampler_note=draws.note,
        jitter_events=draws.jitter_events,
    )


def write_manifest(manifest: RunManifest, directory: str | Path) -> RunManifest:
    """Write manifest.json, flagging a rerun whose inputs digest to the previous run's."""
    target = _ensure_dir(directory) / "manifest.json"
    if target.is_file():
        try:
            previous = RunManifest.model_validate_json(target.read_text(encoding="utf-8"))
        except ValueError:
            previous = None
        if previous is not None and previous.run_digest == manifest.run_digest:
            logger.info("Inputs match the previous run in %s (digest %s)", target.parent, manifest.run_digest[:12])
            manifest = manifest.model_copy(update={"identical_to_previous": True})
    write_json(manifest, target)
    return manifest


def write_error(response: ErrorResponse, directory: str | Path) -> Path:
    return write_json(response, Path(directory) / "error.json")

"""simulate: write a synthetic roll-call dataset, its truth and a ready-to-fit config."""

from __future__ import annotations

from dataclasses import dataclass
import logging
from pathlib import Path

from idealpoint.src.exporter import write_json, write_motion_metadata_csv, write_roll_calls_csv, write_truth
from idealpoint.src.schemas import (
    DataSettings,
    FilterSettings,
    ModelSettings,
    PartySettings,
    RunConfig,
    SamplerSettings,
    SynthSpec,
)
from idealpoint.src.synth import SyntheticDataset, generate, suggest_anchors


logger = logging.getLogger(__name__)


@dataclass(slots=True)
class SimulationResult:
    output_dir: Path
    dataset: SyntheticDataset
    config_path: Path


def _fit_config(spec: SynthSpec, dataset: SyntheticDataset, out: Path, threads: int) -> RunConfig:
    grouped = spec.group_fraction > 0
    return RunConfig(
        data=DataSettings(path="votes.csv", format="csv", motions_path="motions.csv"),
        filter=FilterSettings(min_participation=0.0, drop_unanimous=True),
        model=ModelSettings(dimensions=spec.d),
        anchors=suggest_anchors(dataset.truth, dataset.matrix.legislator_ids),
        sampler=SamplerSettings(seed=spec.seed),
        party=PartySettings(enabled=grouped and spec.delta_values is not None and spec.d == 1),
        output_dir=str(out / "fit"),
        threads=threads,
    )


def run_simulate(spec: SynthSpec, out: str | Path, *, threads: int = 1) -> SimulationResult:
    target = Path(out)
    target.mkdir(parents=True, exist_ok=True)
    dataset = generate(spec)
    matrix = dataset.matrix

    write_roll_calls_csv(matrix, target / "votes.csv")
    write_motion_metadata_csv(matrix, target / "motions.csv")
    write_truth(
        dataset.truth,
        matrix.legislator_ids,
        matrix.motion_ids,
        target,
        delta=dataset.delta if spec.delta_values is not None else None,
    )
    write_json(spec, target / "synth_spec.json")
    config = _fit_config(spec, dataset, target, threads)
    config_path = write_json(config.model_dump(mode="json"), target / "run_config.json")
    logger.info("Simulated %d legislators x %d motions into %s", matrix.n, matrix.m, target)
    return SimulationResult(output_dir=target, dataset=dataset, config_path=config_path)

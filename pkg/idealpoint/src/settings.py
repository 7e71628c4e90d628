"""Run configuration loading: JSON Schema check, environment defaults and flag overrides."""

from __future__ import annotations

import json
import logging
import os
from pathlib import Path
from typing import Any

from jsonschema import Draft202012Validator
from jsonschema.exceptions import best_match
from pydantic import ValidationError as PydanticValidationError

from idealpoint.src.errors import ParseError, ValidationError
from idealpoint.src.schemas import RunConfig


logger = logging.getLogger(__name__)

CONFIG_DIR = Path(__file__).resolve().parent.parent / "config"
SCHEMA_PATH = CONFIG_DIR / "run_config.schema.json"
EXAMPLE_PATH = CONFIG_DIR / "run_config.example.json"


def _load_schema() -> dict[str, Any]:
    return json.loads(SCHEMA_PATH.read_text(encoding="utf-8"))


def read_config_document(path: str | Path) -> dict[str, Any]:
    source = Path(path)
    if not source.is_file():
        raise ValidationError(f"Config file not found: {source}")
    try:
        document = json.loads(source.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(f"Malformed config JSON: {exc.msg}", line=exc.lineno, column=exc.colno) from exc
    validate_config_document(document)
    return document


def validate_config_document(document: Any) -> None:
    validator = Draft202012Validator(_load_schema())
    error = best_match(validator.iter_errors(document))
    if error is not None:
        location = "/".join(str(part) for part in error.absolute_path) or "<root>"
        raise ValidationError(f"Config does not match the schema at {location}: {error.message}")


def _env_int(name: str) -> int | None:
    raw = os.getenv(name)
    if raw is None or not raw.strip():
        return None
    try:
        return int(raw)
    except ValueError as exc:
        raise ValidationError(f"{name} must be an integer (got '{raw}')") from exc


def environment_defaults() -> dict[str, Any]:
    """Values from IDEAL_THREADS, IDEAL_OUTPUT_DIR and IDEAL_SEED; the config file wins over them."""
    defaults: dict[str, Any] = {}
    threads = _env_int("IDEAL_THREADS")
    if threads is not None:
        defaults["threads"] = threads
    output_dir = os.getenv("IDEAL_OUTPUT_DIR")
    if output_dir:
        defaults["output_dir"] = output_dir
    seed = _env_int("IDEAL_SEED")
    if seed is not None:
        defaults["seed"] = seed
    return defaults


def _resolve_relative(value: str | None, base: Path) -> str | None:
    if value is None:
        return None
    candidate = Path(value)
    return str(candidate if candidate.is_absolute() else (base / candidate))


def merge_settings(
    document: dict[str, Any],
    *,
    seed: int | None = None,
    output_dir: str | None = None,
    threads: int | None = None,
) -> dict[str, Any]:
    """Apply precedence defaults < environment < config file < flags to a raw config document."""
    merged = json.loads(json.dumps(document))
    env = environment_defaults()
    sampler = merged.setdefault("sampler", {})
    if "seed" in env:
        sampler.setdefault("seed", env["seed"])
    if "threads" in env:
        merged.setdefault("threads", env["threads"])
    if "output_dir" in env:
        merged.setdefault("output_dir", env["output_dir"])

    if seed is not None:
        sampler["seed"] = seed
    if output_dir is not None:
        merged["output_dir"] = output_dir
    if threads is not None:
        merged["threads"] = threads
    return merged


def load_run_config(
    path: str | Path,
    *,
    seed: int | None = None,
    output_dir: str | None = None,
    threads: int | None = None,
) -> RunConfig:
    """Input paths in the file are resolved against the config file's directory."""
    source = Path(path)
    document = merge_settings(read_config_document(source), seed=seed, output_dir=output_dir, threads=threads)
    base = source.resolve().parent
    data = document["data"]
    data["path"] = _resolve_relative(data["path"], base)
    data["motions_path"] = _resolve_relative(data.get("motions_path"), base)
    party = document.get("party")
    if party is not None and party.get("mapping_path"):
        party["mapping_path"] = _resolve_relative(party["mapping_path"], base)
    try:
        config = RunConfig.model_validate(document)
    except PydanticValidationError as exc:
        raise ValidationError(f"Invalid run configuration: {exc}") from exc
    if config.sampler.burn_in >= config.sampler.iterations:
        raise ValidationError(
            f"sampler.burn_in ({config.sampler.burn_in}) must be smaller than sampler.iterations"
            f" ({config.sampler.iterations})"
        )
    logger.info("Loaded run configuration from %s", source)
    return config

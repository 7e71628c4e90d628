"""Roll-call import pipeline for CSV and JSON vote files."""

from __future__ import annotations

import csv
import json
import logging
from pathlib import Path
import re
from typing import Any, Literal

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict
from pydantic import ValidationError as PydanticValidationError

from idealpoint.src.errors import ParseError, ValidationError
from idealpoint.src.models import RollCallMatrix, Vote
from idealpoint.src.schemas import LegislatorMeta, MotionMeta


logger = logging.getLogger(__name__)

LEGISLATOR_COLUMNS = ["legislator_id", "party", "group"]
OPTIONAL_LEGISLATOR_COLUMNS = {"name"}
MOTION_METADATA_COLUMNS = ["id", "label", "topic", "sponsor_flag"]
MISSING_TOKENS = {"NA", ""}
_RAGGED_RE = re.compile(r"Expected (\d+) fields in line (\d+), saw (\d+)")
_LINE_RE = re.compile(r"line (\d+)")


class RollCallPayload(BaseModel):
    model_config = ConfigDict(extra="forbid")

    legislators: list[LegislatorMeta]
    motions: list[MotionMeta]
    votes: list[list[Literal[0, 1] | None]]


def _clean_text(value: Any) -> str | None:
    if value is None:
        return None
    text = str(value).strip()
    return text or None


def _require_file(path: str | Path) -> Path:
    resolved = Path(path)
    if not resolved.is_file():
        raise ValidationError(f"File not found: {resolved}")
    return resolved


def _read_header(path: Path) -> list[str]:
    with path.open(newline="", encoding="utf-8") as handle:
        header = next(csv.reader(handle), None)
    if not header:
        raise ParseError("CSV file is empty", line=1)
    return [value.strip() for value in header]


def _read_frame(path: Path) -> pd.DataFrame:
    try:
        return pd.read_csv(path, dtype=str, keep_default_na=False, na_filter=False)
    except pd.errors.ParserError as exc:
        message = str(exc)
        ragged = _RAGGED_RE.search(message)
        if ragged:
            expected, line, seen = ragged.groups()
            raise ValidationError(f"Ragged row at line {line}: expected {expected} fields, saw {seen}") from exc
        line = _LINE_RE.search(message)
        raise ParseError(f"Malformed CSV: {message}", line=int(line.group(1)) if line else None) from exc
    except pd.errors.EmptyDataError as exc:
        raise ParseError("CSV file is empty", line=1) from exc


def _check_row_widths(path: Path, width: int) -> None:
    with path.open(newline="", encoding="utf-8") as handle:
        for line, row in enumerate(csv.reader(handle), start=1):
            if row and len(row) != width:
                raise ValidationError(f"Ragged row at line {line}: expected {width} fields, saw {len(row)}")


def _duplicates(values: list[str]) -> list[str]:
    seen: set[str] = set()
    repeated: list[str] = []
    for value in values:
        if value in seen and value not in repeated:
            repeated.append(value)
        seen.add(value)
    return repeated


def _parse_csv(path: Path) -> RollCallMatrix:
    header = _read_header(path)
    for position, expected in enumerate(LEGISLATOR_COLUMNS):
        if position >= len(header) or header[position] != expected:
            found = header[position] if position < len(header) else "<end of header>"
            raise ParseError(f"Expected header column '{expected}', found '{found}'", line=1, column=position + 1)
    meta_width = len(LEGISLATOR_COLUMNS)
    if len(header) > meta_width and header[meta_width] in OPTIONAL_LEGISLATOR_COLUMNS:
        meta_width += 1
    motion_ids = header[meta_width:]
    if not motion_ids:
        raise ValidationError("CSV header lists no motion ids")
    if any(not motion_id for motion_id in motion_ids):
        raise ValidationError("CSV header contains an empty motion id")
    repeated = _duplicates(motion_ids)
    if repeated:
        raise ValidationError(f"Duplicate motion ids: {', '.join(repeated)}")

    _check_row_widths(path, len(header))
    frame = _read_frame(path)

    tokens = frame.iloc[:, meta_width:].to_numpy(dtype=str)
    tokens = np.char.strip(tokens)
    votes = np.full(tokens.shape, -2, dtype=np.int8)
    votes[tokens == "1"] = Vote.YEA
    votes[tokens == "0"] = Vote.NAY
    votes[np.isin(tokens, list(MISSING_TOKENS))] = Vote.MISSING
    invalid = np.argwhere(votes == -2)
    if invalid.size:
        row, column = (int(value) for value in invalid[0])
        raise ParseError(
            f"Invalid vote '{tokens[row, column]}' (expected 1, 0, NA or empty)",
            line=row + 2,
            column=meta_width + column + 1,
        )

    legislators: list[LegislatorMeta] = []
    for _, record in frame.iloc[:, :meta_width].iterrows():
        values = [str(value).strip() for value in record.tolist()]
        legislator_id, party, group = values[:3]
        name = values[3] if meta_width > 3 else ""
        if not legislator_id:
            raise ValidationError(f"Empty legislator id on line {len(legislators) + 2}")
        legislators.append(LegislatorMeta(id=legislator_id, name=name, party=party, group=group or None))

    repeated = _duplicates([item.id for item in legislators])
    if repeated:
        raise ValidationError(f"Duplicate legislator ids: {', '.join(repeated)}")
    motions = [MotionMeta(id=motion_id) for motion_id in motion_ids]
    return RollCallMatrix(votes=votes, legislators=legislators, motions=motions)


def _parse_json(path: Path) -> RollCallMatrix:
    text = path.read_text(encoding="utf-8")
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"Malformed JSON: {exc.msg}", line=exc.lineno, column=exc.colno) from exc
    try:
        payload = RollCallPayload.model_validate(raw)
    except PydanticValidationError as exc:
        raise ValidationError(f"JSON roll-call payload does not match the schema: {exc}") from exc

    width = len(payload.motions)
    for row, values in enumerate(payload.votes):
        if len(values) != width:
            raise ValidationError(f"Ragged votes row {row}: expected {width} entries, got {len(values)}")
    if len(payload.votes) != len(payload.legislators):
        raise ValidationError(
            f"votes has {len(payload.votes)} rows but {len(payload.legislators)} legislators are listed"
        )
    votes = np.array(
        [[Vote.MISSING if value is None else value for value in values] for values in payload.votes],
        dtype=np.int8,
    ).reshape(len(payload.votes), width)
    return RollCallMatrix(votes=votes, legislators=payload.legislators, motions=payload.motions)


def load_roll_calls(path: str | Path, format: Literal["csv", "json"] = "csv") -> RollCallMatrix:
    resolved = _require_file(path)
    normalized = format.strip().lower()
    if normalized == "csv":
        matrix = _parse_csv(resolved)
    elif normalized == "json":
        matrix = _parse_json(resolved)
    else:
        raise ValidationError(f"Unsupported roll-call format: {format}")
    logger.info("Loaded %d legislators x %d motions from %s", matrix.n, matrix.m, resolved)
    return matrix


def load_motion_metadata(path: str | Path) -> list[MotionMeta]:
    frame = _read_frame(_require_file(path))
    if "id" not in frame.columns:
        raise ParseError("Motion metadata needs an 'id' column", line=1)
    unknown = [column for column in frame.columns if column not in MOTION_METADATA_COLUMNS]
    if unknown:
        raise ValidationError(f"Unknown motion metadata columns: {', '.join(unknown)}")

    motions: list[MotionMeta] = []
    for offset, record in enumerate(frame.to_dict(orient="records")):
        flag_text = _clean_text(record.get("sponsor_flag"))
        if flag_text not in (None, "0", "1"):
            column = frame.columns.get_loc("sponsor_flag") + 1
            raise ParseError(f"sponsor_flag must be 0, 1 or empty, got '{flag_text}'", line=offset + 2, column=column)
        motions.append(
            MotionMeta(
                id=_clean_text(record.get("id")) or "",
                label=_clean_text(record.get("label")),
                topic=_clean_text(record.get("topic")),
                sponsor_flag=int(flag_text) if flag_text is not None else None,
            )
        )
    repeated = _duplicates([item.id for item in motions])
    if repeated:
        raise ValidationError(f"Duplicate motion ids in metadata: {', '.join(repeated)}")
    return motions


def attach_motion_metadata(matrix: RollCallMatrix, motions: list[MotionMeta]) -> RollCallMatrix:
    by_id = {item.id: item for item in motions}
    unmatched = [item.id for item in motions if item.id not in set(matrix.motion_ids)]
    if unmatched:
        logger.warning("Ignoring metadata for %d motions absent from the vote file", len(unmatched))
    merged = [by_id.get(item.id, item) for item in matrix.motions]
    return RollCallMatrix(votes=matrix.votes, legislators=matrix.legislators, motions=merged)


def load_group_mapping(path: str | Path) -> dict[str, str]:
    frame = _read_frame(_require_file(path))
    for column in ("legislator_id", "group"):
        if column not in frame.columns:
            raise ParseError(f"Group mapping needs a '{column}' column", line=1)
    mapping: dict[str, str] = {}
    for record in frame.to_dict(orient="records"):
        legislator_id = _clean_text(record["legislator_id"])
        if legislator_id is None:
            continue
        if legislator_id in mapping:
            raise ValidationError(f"Legislator {legislator_id} appears twice in the group mapping")
        mapping[legislator_id] = _clean_text(record["group"]) or ""
    return mapping

"""Participation and unanimity filtering of roll-call matrices."""

from __future__ import annotations

import logging

import numpy as np

from idealpoint.src.errors import DegenerateDataError, ValidationError
from idealpoint.src.models import RollCallMatrix
from idealpoint.src.schemas import DroppedLegislator, DroppedMotion, FilterReport


logger = logging.getLogger(__name__)


def participation(matrix: RollCallMatrix) -> np.ndarray:
    return matrix.observed.mean(axis=1)


def unanimous_columns(matrix: RollCallMatrix) -> np.ndarray:
    """Boolean mask of motions whose non-Missing votes all fall on one side."""
    observed = matrix.observed
    totals = observed.sum(axis=0)
    yeas = (matrix.yea & observed).sum(axis=0)
    return (totals > 0) & ((yeas == 0) | (yeas == totals))


def _filter_once(
    matrix: RollCallMatrix,
    min_participation: float,
    drop_unanimous: bool,
) -> tuple[RollCallMatrix, list[DroppedLegislator], list[DroppedMotion]]:
    rates = participation(matrix)
    keep_rows = rates >= min_participation
    dropped_legislators = [
        DroppedLegislator(id=matrix.legislators[i].id, participation=float(rates[i]))
        for i in np.flatnonzero(~keep_rows)
    ]
    if keep_rows.sum() < 2:
        raise DegenerateDataError(
            f"Only {int(keep_rows.sum())} legislators reach participation {min_participation}; at least 2 are required"
        )
    rows = np.flatnonzero(keep_rows)

    # Motions are judged on the legislators that survived.
    observed = matrix.observed[rows]
    yea = matrix.yea[rows] & observed
    totals = observed.sum(axis=0)
    yeas = yea.sum(axis=0)
    empty = totals == 0
    unanimous = ~empty & ((yeas == 0) | (yeas == totals)) if drop_unanimous else np.zeros_like(empty)

    dropped_motions: list[DroppedMotion] = []
    for j in range(matrix.m):
        if empty[j]:
            dropped_motions.append(DroppedMotion(id=matrix.motions[j].id, reason="all-missing"))
        elif unanimous[j]:
            dropped_motions.append(DroppedMotion(id=matrix.motions[j].id, reason="unanimous"))
    columns = np.flatnonzero(~(empty | unanimous))
    if columns.size < 1:
        raise DegenerateDataError("Filtering removed every motion")
    return matrix.subset(rows, columns), dropped_legislators, dropped_motions


def filter_matrix(
    matrix: RollCallMatrix,
    min_participation: float = 0.95,
    drop_unanimous: bool = True,
    until_stable: bool = False,
) -> tuple[RollCallMatrix, FilterReport]:
    """Drop low-participation legislators, then unanimous or empty motions.

    A single pass measures participation over every input motion, so dropping a
    motion can push a kept legislator under the threshold on a second call.
    ``until_stable`` repeats the pass until nothing more is dropped; the result
    is then a fixed point and filtering it again reports no drops.
    """
    if not 0.0 <= min_participation <= 1.0:
        raise ValidationError(f"min_participation must lie in [0, 1] (got {min_participation})")

    filtered, dropped_legislators, dropped_motions = _filter_once(matrix, min_participation, drop_unanimous)
    passes = 1
    changed = bool(dropped_legislators or dropped_motions)
    # Every pass that drops something shrinks the matrix, so this terminates.
    while until_stable and changed:
        filtered, more_legislators, more_motions = _filter_once(filtered, min_participation, drop_unanimous)
        changed = bool(more_legislators or more_motions)
        if changed:
            dropped_legislators += more_legislators
            dropped_motions += more_motions
            passes += 1

    report = FilterReport(
        min_participation=min_participation,
        drop_unanimous=drop_unanimous,
        until_stable=until_stable,
        passes=passes,
        dropped_legislators=dropped_legislators,
        dropped_motions=dropped_motions,
        n_before=matrix.n,
        n_after=filtered.n,
        m_before=matrix.m,
        m_after=filtered.m,
    )
    logger.info(
        "Filtered %d->%d legislators and %d->%d motions in %d pass(es)",
        report.n_before,
        report.n_after,
        report.m_before,
        report.m_after,
        passes,
    )
    return filtered, report

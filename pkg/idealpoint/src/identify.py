"""Identification: anchor legislators and reflection alignment of posterior draws."""

from __future__ import annotations

from collections.abc import Sequence
import logging

import numpy as np

from idealpoint.src.errors import ValidationError
from idealpoint.src.models import AnchorSpec, PosteriorDraws, RollCallMatrix
from idealpoint.src.schemas import AnchorInput, AnchorValidationReport


logger = logging.getLogger(__name__)


def build_anchor_spec(items: Sequence[AnchorInput]) -> AnchorSpec:
    return AnchorSpec(anchors=[(item.legislator_id, np.asarray(item.position, dtype=float)) for item in items])


def validate_anchors(matrix: RollCallMatrix, anchors: AnchorSpec, d: int) -> AnchorValidationReport:
    known = set(matrix.legislator_ids)
    unknown = [legislator_id for legislator_id in anchors.ids if legislator_id not in known]
    if unknown:
        raise ValidationError(f"Unknown anchor legislator ids: {', '.join(unknown)}")
    if len(set(anchors.ids)) != anchors.count:
        raise ValidationError("Each legislator can be anchored only once")

    for legislator_id, position in anchors.anchors:
        if position.shape != (d,):
            raise ValidationError(f"Anchor {legislator_id} has {position.shape[0]} coordinates, expected {d}")
        if not np.isfinite(position).all():
            raise ValidationError(f"Anchor {legislator_id} has a non-finite position")

    if anchors.count >= 2:
        positions = anchors.positions()
        offsets = positions[1:] - positions[0]
        required = min(anchors.count - 1, d)
        if np.linalg.matrix_rank(offsets) < required:
            raise ValidationError("Anchor positions are not affinely independent (coincident or collinear points)")

    warnings: list[str] = []
    expected = d + 1
    if anchors.count < expected:
        pinned = "reflection and rotation" if d > 1 else "reflection and translation"
        warnings.append(
            f"{anchors.count} anchors for d={d}; {expected} are needed to pin {pinned}. "
            "The prior on ideal points identifies location and scale only partially."
        )
    elif anchors.count > expected:
        warnings.append(f"{anchors.count} anchors for d={d}; {expected} suffice, the rest over-constrain the space.")
    for message in warnings:
        logger.info(message)

    return AnchorValidationReport(valid=True, count=anchors.count, expected_count=expected, warnings=warnings)


def _normalize_signs(desired_sign: int | Sequence[int], d: int) -> np.ndarray:
    signs = np.atleast_1d(np.asarray(desired_sign, dtype=int))
    if signs.shape == (1,) and d > 1:
        signs = np.repeat(signs, d)
    if signs.shape != (d,) or not np.isin(signs, [-1, 1]).all():
        raise ValidationError(f"desired_sign must hold {d} values in {{-1, +1}}")
    return signs


def orient_draws(draws: PosteriorDraws, reference: str, desired_sign: int | Sequence[int]) -> PosteriorDraws:
    """Flip (alpha_k, beta_k) jointly per chain so the reference legislator lands on the desired side.

    The whole beta column is reflected, anchored rows included, so every draw keeps
    its likelihood. A flipped chain therefore reports its anchors at the mirrored
    positions; callers that need anchors at their configured coordinates should
    orient only runs with fewer than d + 1 anchors.
    """
    if reference not in draws.legislator_ids:
        raise ValidationError(f"Unknown reference legislator id: {reference}")
    if reference in draws.anchors:
        raise ValidationError(f"Reference legislator {reference} is anchored; choose a free legislator")
    signs = _normalize_signs(desired_sign, draws.d)
    row = draws.legislator_ids.index(reference)

    chain_means = draws.beta[:, :, row, :].mean(axis=1)
    flips = np.where(chain_means * signs[np.newaxis, :] < 0, -1.0, 1.0)
    if (flips == 1.0).all():
        return draws

    for chain, dimension in zip(*np.nonzero(flips < 0)):
        logger.info("Reflecting dimension %d of chain %d", dimension + 1, chain)
    factors = flips[:, np.newaxis, np.newaxis, :]
    return draws.replace(beta=draws.beta * factors, alpha=draws.alpha * factors)

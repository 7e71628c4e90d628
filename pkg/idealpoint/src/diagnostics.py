"""Split-chain R-hat and effective sample size for every sampled parameter."""

from __future__ import annotations

import logging
import warnings

import arviz as az
import numpy as np

from idealpoint.src.errors import ValidationError
from idealpoint.src.models import PosteriorDraws
from idealpoint.src.schemas import ConvergenceRow


logger = logging.getLogger(__name__)

MIN_SINGLE_CHAIN_DRAWS = 200
MIN_DRAWS_PER_CHAIN = 4
RHAT_THRESHOLD = 1.1


def _scalar_diagnostics(trace: np.ndarray) -> tuple[float | None, float | None]:
    """trace has shape (chain, draw); constant traces have no defined diagnostics."""
    if np.ptp(trace) == 0:
        return None, None
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        rhat = float(az.rhat(trace, method="split"))
        ess = float(az.ess(trace, method="mean"))
    return (rhat if np.isfinite(rhat) else None), (ess if np.isfinite(ess) else None)


def _block_rows(parameter: str, values: np.ndarray, ids: list[str], vector: bool) -> list[ConvergenceRow]:
    if values.ndim == 3:
        values = values[..., np.newaxis]
    rows: list[ConvergenceRow] = []
    for index, identifier in enumerate(ids):
        for k in range(values.shape[3]):
            rhat, ess = _scalar_diagnostics(values[:, :, index, k])
            rows.append(
                ConvergenceRow(
                    parameter=parameter,
                    index=identifier,
                    dimension=k + 1 if vector else 0,
                    rhat=rhat,
                    ess=ess,
                    not_applicable=rhat is None,
                )
            )
    return rows


def convergence_diagnostics(draws: PosteriorDraws) -> list[ConvergenceRow]:
    """Split-R-hat (each chain halved) and autocorrelation-based bulk ESS via arviz."""
    if draws.draws_per_chain < MIN_DRAWS_PER_CHAIN:
        raise ValidationError(f"Diagnostics need at least {MIN_DRAWS_PER_CHAIN} draws per chain")
    if draws.chains < 2 and draws.draws_per_chain < MIN_SINGLE_CHAIN_DRAWS:
        raise ValidationError(
            f"A single chain needs at least {MIN_SINGLE_CHAIN_DRAWS} draws for split-chain diagnostics"
        )

    rows = _block_rows("mu", draws.mu, draws.motion_ids, vector=False)
    rows += _block_rows("alpha", draws.alpha, draws.motion_ids, vector=True)
    rows += _block_rows("beta", draws.beta, draws.legislator_ids, vector=True)
    if draws.delta is not None:
        rows += _block_rows("delta", draws.delta, draws.motion_ids, vector=False)

    flagged = [row for row in rows if row.rhat is not None and row.rhat >= RHAT_THRESHOLD]
    if flagged:
        logger.warning("%d of %d parameters have split R-hat >= %.2f", len(flagged), len(rows), RHAT_THRESHOLD)
    return rows


def share_converged(rows: list[ConvergenceRow], threshold: float = RHAT_THRESHOLD) -> float:
    applicable = [row for row in rows if not row.not_applicable]
    if not applicable:
        return 1.0
    return sum(row.rhat < threshold for row in applicable) / len(applicable)

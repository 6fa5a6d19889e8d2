"""Buffer-interval control of the interpolation rank."""

import logging
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from tdb_sparse.errors import TDBError
from tdb_sparse.sampling import ldeim_select

logger = logging.getLogger(__name__)


class RankControlError(TDBError):
    """Invalid rank controller settings or indicator input."""

    pass


@dataclass(frozen=True)
class RankController:
    """
    Interpolation rank p kept inside [p_min, p_max].

    Attributes:
        p: Current rank.
        eps_l: Lower bound of the buffer interval.
        eps_u: Upper bound of the buffer interval.
        p_min: Smallest allowed rank (≥ 1).
        p_max: Largest allowed rank.
    """

    p: int
    eps_l: float
    eps_u: float
    p_min: int
    p_max: int

    def __post_init__(self) -> None:
        if not 0.0 < self.eps_l < self.eps_u:
            raise RankControlError(
                f"buffer interval needs 0 < eps_l < eps_u, got eps_l={self.eps_l}, "
                f"eps_u={self.eps_u}"
            )
        if not 1 <= self.p_min <= self.p <= self.p_max:
            raise RankControlError(
                f"need 1 <= p_min <= p <= p_max, got p_min={self.p_min}, p={self.p}, "
                f"p_max={self.p_max}"
            )


@dataclass(frozen=True)
class RankDecision:
    """Outcome of one adaptivity check; columns is the L-DEIM plan after an addition."""

    controller: RankController
    change: int
    columns: Optional[np.ndarray] = None


def error_indicator(sigma: np.ndarray) -> float:
    """
    Relative weight of the trailing singular value, ε = σ_p² / Σ σ_i².

    Raises:
        RankControlError: If every singular value is zero.
    """
    sigma = np.asarray(sigma, dtype=float)
    total = float(np.sum(sigma * sigma))
    if sigma.size == 0 or total == 0.0:
        raise RankControlError("error indicator is undefined for all-zero singular values")
    return float(sigma[-1] ** 2 / total)


def adapt_rank(controller: RankController, eps: float, YF: np.ndarray) -> RankDecision:
    """
    Add or remove one interpolation direction when ε leaves [eps_l, eps_u].

    Args:
        controller: Current controller.
        eps: Error indicator of the accepted step.
        YF: Column-selection basis of the accepted step (s×p).

    Returns:
        RankDecision; on addition the plan holds p+1 column indices from L-DEIM.
    """
    p = controller.p
    if eps > controller.eps_u and p < controller.p_max and p + 1 <= YF.shape[0]:
        plan = ldeim_select(YF, p + 1).indices
        logger.info("interpolation rank %d -> %d (eps=%.3e)", p, p + 1, eps)
        return RankDecision(replace(controller, p=p + 1), +1, plan)
    if eps < controller.eps_l and p > controller.p_min:
        logger.info("interpolation rank %d -> %d (eps=%.3e)", p, p - 1, eps)
        return RankDecision(replace(controller, p=p - 1), -1)
    return RankDecision(controller, 0)

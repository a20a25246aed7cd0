"""Central and non-central χ² quantiles used by the detector thresholds."""
import logging

import numpy as np
from scipy import optimize, stats

from src.errors import QuantileError

logger = logging.getLogger(__name__)

SERIES_TAIL = 1e-12


def chi2_quantile(p: float, dof: int) -> float:
    """Central χ² quantile, e.g. the threshold X²_α(k) for p = 1 − α."""
    if not 0.0 < p < 1.0:
        raise QuantileError(f"probability must lie in (0, 1), got {p}")
    if dof <= 0:
        raise QuantileError(f"degrees of freedom must be positive, got {dof}")
    return float(stats.chi2.ppf(p, dof))


def _poisson_weights(ncp: float) -> tuple[np.ndarray, np.ndarray]:
    mu = 0.5 * ncp
    upper = int(stats.poisson.isf(SERIES_TAIL, mu)) + 1 if mu > 0 else 0
    j = np.arange(upper + 1)
    return j, stats.poisson.pmf(j, mu)


def ncx2_cdf(x: float, dof: int, ncp: float) -> float:
    """Non-central χ² CDF as a Poisson(ncp/2) mixture of central χ² CDFs.

    The mixture is truncated once the remaining Poisson mass drops below
    1e-12.
    """
    if ncp < 0:
        raise QuantileError(f"non-centrality must be non-negative, got {ncp}")
    if x <= 0:
        return 0.0
    j, weights = _poisson_weights(ncp)
    return float(np.sum(weights * stats.chi2.cdf(x, dof + 2 * j)))


def ncx2_quantile(p: float, dof: int, ncp: float, xtol: float = 1e-10) -> float:
    """Quantile of the non-central χ² by bisection on the series CDF."""
    lower = chi2_quantile(p, dof)
    if ncp == 0:
        return lower
    upper = max(2.0 * lower, lower + ncp)
    for _ in range(64):
        if ncx2_cdf(upper, dof, ncp) >= p:
            break
        upper *= 2.0
    else:
        raise QuantileError(f"could not bracket the {p} quantile (dof={dof}, ncp={ncp})")
    try:
        root = optimize.bisect(lambda x: ncx2_cdf(x, dof, ncp) - p, lower, upper, xtol=xtol, maxiter=500)
    except (RuntimeError, ValueError) as e:
        raise QuantileError(f"quantile bisection failed (dof={dof}, ncp={ncp}): {e}") from e
    logger.debug(f"ncx2 quantile p={p} dof={dof} ncp={ncp:.6g} -> {root:.6f}")
    return float(root)

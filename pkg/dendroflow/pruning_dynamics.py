"""
Exact maps induced by pruning on chain and branching-process parameters.
"""

import logging
import math
import warnings
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .chains import EhmcParams, GwParams
from .exceptions import DendroflowValidationError, SupercriticalExcursionWarning
from .utils import get_dendroflow_setting

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CharacteristicFn:
    """Closed-form characteristic function of a jump density on the positive half-line."""

    name: str
    evaluate: Callable[[np.ndarray], np.ndarray]

    def __call__(self, s):
        return self.evaluate(np.asarray(s, dtype=float))


def exponential_cf(lam: float = 1.0) -> CharacteristicFn:
    if lam <= 0:
        raise DendroflowValidationError(f"rate must be positive, got {lam}")
    return CharacteristicFn(f"exponential({lam})", lambda s: 1.0 / (1.0 - 1j * s / lam))


def uniform_cf(h: float = 1.0) -> CharacteristicFn:
    """Uniform density on (0, h)."""
    if h <= 0:
        raise DendroflowValidationError(f"width must be positive, got {h}")

    def evaluate(s):
        z = 1j * s * h
        safe = np.where(s == 0, 1.0, z)
        return np.where(s == 0, 1.0 + 0j, (np.exp(safe) - 1.0) / safe)

    return CharacteristicFn(f"uniform(0,{h})", evaluate)


def gamma_cf(shape: float, scale: float = 1.0) -> CharacteristicFn:
    if shape <= 0 or scale <= 0:
        raise DendroflowValidationError(f"gamma parameters must be positive: {shape}, {scale}")
    return CharacteristicFn(
        f"gamma({shape},{scale})", lambda s: (1.0 - 1j * scale * s) ** (-shape)
    )


def default_grid() -> np.ndarray:
    start, stop, count = get_dendroflow_setting('DSS_GRID')
    return np.linspace(float(start), float(stop), int(count))


def dss_residual(fhat: CharacteristicFn, s_grid: Optional[Sequence[float]] = None) -> float:
    """
    Largest violation of Re f(2s) = |f(s) / (2 - f(s))|^2 over the grid.

    Raises:
        DendroflowValidationError: If the grid is empty
    """
    grid = default_grid() if s_grid is None else np.asarray(s_grid, dtype=float)
    if grid.size == 0:
        raise DendroflowValidationError("dss_residual needs a non-empty grid")
    at_s = fhat(grid)
    left = np.real(fhat(2.0 * grid))
    right = np.abs(at_s / (2.0 - at_s)) ** 2
    return float(np.max(np.abs(left - right)))


def ehmc_prune_params(e: EhmcParams) -> EhmcParams:
    """
    Parameters of the chain of local minima.

    Raises:
        DendroflowValidationError: If p is 0 or 1 (the chain has no local minima)
    """
    if e.p in (0.0, 1.0):
        raise DendroflowValidationError(f"a chain with p={e.p} has no local minima to prune to")
    down = e.p * e.lambda_d
    up = (1.0 - e.p) * e.lambda_u
    return EhmcParams(p=down / (down + up), lambda_u=up, lambda_d=down)


def a_gamma_step(A: float, gamma: float) -> Tuple[float, float]:
    """Pruning map on (A, gamma); the image always has A* gamma* = 1."""
    if A <= 0 or gamma <= 0:
        raise DendroflowValidationError(f"A and gamma must be positive: A={A}, gamma={gamma}")
    return A / gamma, gamma / A


def gw_p2_step(p2: float) -> float:
    """Branching probability after one pruning of a binary Galton-Watson tree."""
    if not 0.0 <= p2 <= 0.5:
        raise DendroflowValidationError(f"p2 must lie in [0, 1/2], got {p2}")
    return _branching_recursion(p2)


def excursion_p2(e: EhmcParams) -> float:
    """Branching probability of the level-set tree of a first positive excursion."""
    down = e.p * e.lambda_d
    return down / ((1.0 - e.p) * e.lambda_u + down)


def ehmc_to_gw(e: EhmcParams) -> GwParams:
    """
    Galton-Watson law of the excursion tree.

    A supercritical result (p2 > 1/2) is returned with a
    :class:`SupercriticalExcursionWarning`; tree generation rejects it.
    """
    p2 = excursion_p2(e)
    if p2 > 0.5:
        logger.warning(f"Excursion of {e} maps to supercritical p2={p2:.6g}")
        warnings.warn(
            f"excursion branching probability {p2:.6g} exceeds 1/2",
            SupercriticalExcursionWarning,
            stacklevel=2,
        )
    # rises are Exp(q lambda_u) = Exp(mu + lambda), falls Exp(p lambda_d) = Exp(mu - lambda)
    mu = 0.5 * ((1.0 - e.p) * e.lambda_u + e.p * e.lambda_d)
    return GwParams(p2=p2, mu=mu)


def _branching_recursion(p2: float) -> float:
    return p2 * p2 / ((1.0 - p2) ** 2 + p2 * p2)


def horizontal_probability(e: EhmcParams, n: int) -> float:
    """
    Up-jump probability of the n-th pruned chain, read off the branching side.

    The up-jump probability after n prunings equals the excursion branching
    probability after n - 1 prunings, so only the branching recursion is iterated.
    """
    if n < 0:
        raise DendroflowValidationError(f"n cannot be negative, got {n}")
    if n == 0:
        return e.p
    p2 = excursion_p2(e)
    for _ in range(n - 1):
        p2 = _branching_recursion(p2)
    return p2


def minimum_probability(e: EhmcParams) -> float:
    """Probability that a chain step is a local minimum: p (1 - p)."""
    return e.p * (1.0 - e.p)


def two_sided_exponential_cdf(e: EhmcParams) -> Callable[[np.ndarray], np.ndarray]:
    """CDF of the exponential-mixture jump law."""
    q = 1.0 - e.p

    def cdf(x):
        x = np.asarray(x, dtype=float)
        below = q * np.exp(e.lambda_d * np.minimum(x, 0.0))
        above = q + e.p * -np.expm1(-e.lambda_u * np.maximum(x, 0.0))
        return np.where(x < 0, below, above)

    return cdf


def iterate_ehmc(e: EhmcParams, steps: int) -> List[Dict[str, float]]:
    """
    Table of the pruning iteration starting from ``e``.

    Row m holds p, the rates, A, gamma, the excursion branching probability
    and the local-minimum probability after m prunings.
    """
    if steps < 0:
        raise DendroflowValidationError(f"steps cannot be negative, got {steps}")
    rows = []
    current = e
    for m in range(steps + 1):
        rows.append(
            {
                'm': m,
                'p': current.p,
                'lambda_u': current.lambda_u,
                'lambda_d': current.lambda_d,
                'A': current.A,
                'gamma': current.gamma,
                'p2': excursion_p2(current),
                'p_min': minimum_probability(current),
            }
        )
        if current.p in (0.0, 1.0):
            logger.info(f"Pruning iteration degenerated at step {m}: p={current.p}")
            break
        current = ehmc_prune_params(current)
    return rows


def is_fixed_point(A: float, gamma: float, tolerance: float = 0.0) -> bool:
    A_next, gamma_next = a_gamma_step(A, gamma)
    return math.isclose(A_next, A, abs_tol=tolerance) and math.isclose(gamma_next, gamma, abs_tol=tolerance)

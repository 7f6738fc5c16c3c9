"""
Seeded generators: homogeneous Markov chains, Galton-Watson trees and fBm.
"""

import logging
from abc import ABC, abstractmethod
from collections import deque
from dataclasses import asdict, dataclass
from typing import Any, ClassVar, Dict, List, Mapping, Optional

import numpy as np

from .exceptions import (
    DendroflowValidationError,
    EmbeddingError,
    ExcursionNotFoundError,
    GenerationError,
)
from .level_set import Series, SeriesLike, as_series
from .tree_core import Tree, enumerate_binary_shapes, tree_from_children
from .utils import SeedLike, make_generator, validate_positive_int, validate_probability, validate_rate

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EhmcParams:
    """
    Exponential-mixture jump law: up Exp(lambda_u) with probability p, else down Exp(lambda_d).
    """

    p: float
    lambda_u: float
    lambda_d: float

    def __post_init__(self):
        validate_probability(self.p, 'p')
        validate_rate(self.lambda_u, 'lambda_u')
        validate_rate(self.lambda_d, 'lambda_d')

    @property
    def A(self) -> float:
        return (1.0 - self.p) / self.p if self.p > 0 else float('inf')

    @property
    def gamma(self) -> float:
        return self.lambda_d / self.lambda_u

    @property
    def mean_jump(self) -> float:
        return self.p / self.lambda_u - (1.0 - self.p) / self.lambda_d

    @property
    def is_symmetric(self) -> bool:
        return self.p == 0.5 and self.lambda_u == self.lambda_d

    @property
    def is_mean_zero(self) -> bool:
        return bool(np.isclose(self.p * self.lambda_d, (1.0 - self.p) * self.lambda_u, rtol=1e-12, atol=0.0))


class KernelSpec(ABC):
    """Jump distribution of a homogeneous Markov chain."""

    kind: ClassVar[str]

    @property
    @abstractmethod
    def is_symmetric(self) -> bool:
        ...

    @abstractmethod
    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        ...

    def to_config(self) -> Dict[str, Any]:
        return {'kind': self.kind, **asdict(self)}


@dataclass(frozen=True)
class GaussianKernel(KernelSpec):
    kind: ClassVar[str] = 'gaussian'
    sigma: float = 1.0

    def __post_init__(self):
        validate_rate(self.sigma, 'sigma')

    @property
    def is_symmetric(self) -> bool:
        return True

    def sample(self, rng, size):
        return rng.normal(0.0, self.sigma, size)


@dataclass(frozen=True)
class UniformKernel(KernelSpec):
    kind: ClassVar[str] = 'uniform'
    h: float = 1.0

    def __post_init__(self):
        validate_rate(self.h, 'h')

    @property
    def is_symmetric(self) -> bool:
        return True

    def sample(self, rng, size):
        return rng.uniform(-self.h, self.h, size)


@dataclass(frozen=True)
class LaplaceKernel(KernelSpec):
    kind: ClassVar[str] = 'laplace'
    lam: float = 1.0

    def __post_init__(self):
        validate_rate(self.lam, 'lambda')

    @property
    def is_symmetric(self) -> bool:
        return True

    def sample(self, rng, size):
        return rng.laplace(0.0, 1.0 / self.lam, size)

    def to_config(self):
        return {'kind': self.kind, 'lambda': self.lam}


@dataclass(frozen=True)
class ExponentialMixtureKernel(KernelSpec):
    kind: ClassVar[str] = 'ehmc'
    params: EhmcParams = EhmcParams(0.5, 1.0, 1.0)

    @property
    def is_symmetric(self) -> bool:
        return self.params.is_symmetric

    def sample(self, rng, size):
        e = self.params
        up = rng.random(size) < e.p
        rises = rng.exponential(1.0 / e.lambda_u, size)
        drops = rng.exponential(1.0 / e.lambda_d, size)
        return np.where(up, rises, -drops)

    def to_config(self):
        return {'kind': self.kind, **asdict(self.params)}


@dataclass(frozen=True)
class RademacherKernel(KernelSpec):
    """+-1 steps; a positive ``jitter`` adds N(0, jitter^2) noise so values are a.s. distinct."""

    kind: ClassVar[str] = 'rademacher'
    jitter: float = 0.0

    def __post_init__(self):
        if self.jitter < 0:
            raise DendroflowValidationError(f"jitter cannot be negative, got {self.jitter}")

    @property
    def is_symmetric(self) -> bool:
        return True

    def sample(self, rng, size):
        steps = 2.0 * rng.integers(0, 2, size) - 1.0
        if self.jitter > 0:
            steps = steps + rng.normal(0.0, self.jitter, size)
        return steps


KERNEL_KEYS = {
    'gaussian': {'sigma'},
    'uniform': {'h'},
    'laplace': {'lambda'},
    'ehmc': {'p', 'lambda_u', 'lambda_d'},
    'rademacher': {'jitter'},
}


def kernel_from_config(config: Mapping[str, Any]) -> KernelSpec:
    """
    Build a kernel from ``{kind, sigma|h|lambda|p,lambda_u,lambda_d|jitter}``.

    Raises:
        DendroflowValidationError: On an unknown kind, unknown keys or bad values
    """
    config = dict(config)
    kind = config.pop('kind', None)
    if kind not in KERNEL_KEYS:
        raise DendroflowValidationError(
            f"Unknown kernel kind {kind!r}; expected one of {sorted(KERNEL_KEYS)}"
        )
    unknown = set(config) - KERNEL_KEYS[kind]
    if unknown:
        raise DendroflowValidationError(
            f"Unknown parameter(s) for {kind} kernel: {', '.join(sorted(unknown))}"
        )

    values = {key: float(value) for key, value in config.items()}
    if kind == 'gaussian':
        return GaussianKernel(**values)
    if kind == 'uniform':
        return UniformKernel(**values)
    if kind == 'laplace':
        return LaplaceKernel(lam=values.get('lambda', 1.0))
    if kind == 'rademacher':
        return RademacherKernel(**values)
    return ExponentialMixtureKernel(
        EhmcParams(
            p=values.get('p', 0.5),
            lambda_u=values.get('lambda_u', 1.0),
            lambda_d=values.get('lambda_d', 1.0),
        )
    )


@dataclass(frozen=True)
class GwParams:
    """
    Binary Galton-Watson law: two children with probability p2, none otherwise.

    ``mu`` sets the edge-length scale. The rise and fall rates of the matching
    exponential excursion are mu + lambda and mu - lambda with
    lambda = mu (1 - 2 p2).
    """

    p2: float
    mu: float = 1.0

    def __post_init__(self):
        validate_probability(self.p2, 'p2')
        validate_rate(self.mu, 'mu')

    @property
    def p0(self) -> float:
        return 1.0 - self.p2

    @property
    def lambda_(self) -> float:
        return self.mu * (1.0 - 2.0 * self.p2)

    @property
    def edge_rate_up(self) -> float:
        return self.mu + self.lambda_

    @property
    def edge_rate_down(self) -> float:
        return self.mu - self.lambda_

    @property
    def is_critical(self) -> bool:
        return self.p2 == 0.5

    @property
    def is_supercritical(self) -> bool:
        return self.p2 > 0.5


def gen_chain(kernel: KernelSpec, n: int, seed: SeedLike, bit_generator: Optional[str] = None) -> Series:
    """Chain of length n started at 0 with i.i.d. jumps from ``kernel``."""
    n = validate_positive_int(n, 'n')
    rng = make_generator(seed, bit_generator)
    values = np.zeros(n)
    if n > 1:
        np.cumsum(kernel.sample(rng, n - 1), out=values[1:])
    return Series(values)


def gen_gw_tree(g: GwParams, max_nodes: int, seed: SeedLike, bit_generator: Optional[str] = None) -> Tree:
    """
    Binary Galton-Watson tree with i.i.d. Exp(mu) edge lengths, grown breadth first.

    Raises:
        DendroflowValidationError: If p2 > 1/2
        GenerationError: If the tree grows past ``max_nodes``
    """
    if g.is_supercritical:
        raise DendroflowValidationError(f"p2={g.p2} is supercritical; only p2 <= 1/2 is allowed")
    max_nodes = validate_positive_int(max_nodes, 'max_nodes')
    rng = make_generator(seed, bit_generator)

    children: List[List[int]] = [[]]
    queue = deque([0])
    while queue:
        v = queue.popleft()
        if rng.random() < g.p2:
            if len(children) + 2 > max_nodes:
                raise GenerationError(f"Galton-Watson tree exceeded {max_nodes} nodes")
            for _ in range(2):
                children[v].append(len(children))
                queue.append(len(children))
                children.append([])

    lengths = rng.exponential(1.0 / g.mu, len(children))
    return tree_from_children(children, lengths.tolist(), 0, float(lengths[0]))


def gw_shape_probabilities(p2: float, max_leaves: int) -> Dict[str, float]:
    """Probability of every planar binary shape with at most ``max_leaves`` leaves."""
    p0 = 1.0 - p2
    return {
        signature: p2 ** (n - 1) * p0 ** n
        for n in range(1, max_leaves + 1)
        for signature in enumerate_binary_shapes(n)
    }


def fgn_autocovariance(H: float, lags: np.ndarray) -> np.ndarray:
    """Autocovariance of unit-variance fractional Gaussian noise."""
    k = np.abs(np.asarray(lags, dtype=float))
    return 0.5 * (np.abs(k - 1) ** (2 * H) - 2 * k ** (2 * H) + (k + 1) ** (2 * H))


def gen_fbm(H: float, n: int, seed: SeedLike, bit_generator: Optional[str] = None) -> Series:
    """
    Fractional Brownian motion sampled at n+1 points from 0, via circulant embedding.

    The n increments are exact fractional Gaussian noise with unit variance.

    Raises:
        DendroflowValidationError: If H is outside (0, 1) or n is not a power of two
        EmbeddingError: If the circulant embedding has a negative eigenvalue
    """
    if not 0.0 < H < 1.0:
        raise DendroflowValidationError(f"Hurst exponent must lie in (0, 1), got {H}")
    n = validate_positive_int(n, 'n')
    if n & (n - 1):
        raise DendroflowValidationError(f"n must be a power of two, got {n}")

    gamma = fgn_autocovariance(H, np.arange(n + 1))
    row = np.concatenate((gamma, gamma[-2:0:-1]))
    eigenvalues = np.fft.fft(row).real
    if eigenvalues.min() < -1e-10 * eigenvalues.max():
        raise EmbeddingError(
            f"circulant embedding has a negative eigenvalue {eigenvalues.min():.3g}; "
            "use a larger n"
        )
    eigenvalues = np.clip(eigenvalues, 0.0, None)

    rng = make_generator(seed, bit_generator)
    m = len(row)
    noise = rng.standard_normal(m) + 1j * rng.standard_normal(m)
    fgn = np.fft.fft(np.sqrt(eigenvalues / m) * noise)[:n].real
    return Series(np.concatenate(([0.0], np.cumsum(fgn))))


def first_excursion(s: SeriesLike) -> Series:
    """
    First positive excursion of a series above its starting level.

    The excursion closes at the first sample at or below the starting level.
    That sample is replaced by 0 at its own index: the crossing time is not
    interpolated, and the level-set tree, which depends only on the values,
    is the same as for the interpolated path.

    Raises:
        ExcursionNotFoundError: If the series does not rise first or never returns
    """
    x = as_series(s).values
    x = x - x[0]
    if len(x) < 2 or x[1] <= 0:
        raise ExcursionNotFoundError("series does not start with a rise")
    returns = np.flatnonzero(x[1:] <= 0)
    if len(returns) == 0:
        raise ExcursionNotFoundError()
    end = int(returns[0]) + 1
    if x[end] == 0:
        return Series(x[:end + 1])
    return Series(np.concatenate((x[:end], [0.0])))


def sample_excursion(kernel: KernelSpec, rng: np.random.Generator, max_steps: int) -> Optional[Series]:
    """
    First excursion of a fresh chain whose first jump is conditioned upward.

    Returns:
        The excursion, or ``None`` when it is still open after ``max_steps`` jumps
    """
    first = kernel.sample(rng, 1)[0]
    attempts = 1
    while first <= 0:
        if attempts >= max_steps:
            return None
        first = kernel.sample(rng, 1)[0]
        attempts += 1

    pieces = [np.array([0.0, first])]
    level = first
    steps = 1
    block = 64
    while steps < max_steps:
        size = min(block, max_steps - steps)
        path = level + np.cumsum(kernel.sample(rng, size))
        below = np.flatnonzero(path <= 0)
        if len(below):
            pieces.append(path[:below[0] + 1])
            return first_excursion(np.concatenate(pieces))
        pieces.append(path)
        level = path[-1]
        steps += size
        block *= 2
    return None

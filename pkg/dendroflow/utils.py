"""
Utility functions for the dendroflow package
"""

import math
import os
from typing import Any, Optional, Sequence, Tuple, Union

import numpy as np
from django.conf import settings
from django.core.exceptions import ImproperlyConfigured

from .exceptions import DendroflowValidationError

SeedLike = Union[int, Sequence[int]]

BIT_GENERATORS = {
    'philox': np.random.Philox,
    'pcg64': np.random.PCG64,
}


def get_default_settings() -> dict:
    """
    Get default settings for dendroflow configuration.

    Returns:
        Dictionary with default settings
    """
    return {
        'THREADS': 1,
        'BIT_GENERATOR': 'philox',
        'BATCHES': 20,
        'DSS_GRID': (-10.0, 10.0, 401),
        'FORMAT': 'csv',
        'SAVE_TO_DATABASE': False,
        'GW_MAX_NODES': 10000,
        'MAX_EXCURSION_STEPS': 100000,
        'FOREST_BLOCK': 2 ** 18,
        'CSV_DIGITS': 12,
    }


def get_dendroflow_setting(setting_name: str, default: Any = None) -> Any:
    """
    Get dendroflow configuration from Django settings.

    Settings can be defined in multiple ways:
    1. DENDROFLOW_<SETTING_NAME>
    2. In DENDROFLOW dictionary

    Falls back to ``default`` and then to ``get_default_settings()``; works
    before (or without) Django settings being configured.

    Args:
        setting_name: Name of the setting
        default: Default value if setting is not found

    Returns:
        Setting value
    """
    if default is None:
        default = get_default_settings().get(setting_name)

    if not settings.configured:
        return default

    full_setting_name = f"DENDROFLOW_{setting_name}"
    if hasattr(settings, full_setting_name):
        return getattr(settings, full_setting_name)

    config = getattr(settings, 'DENDROFLOW', None)
    if isinstance(config, dict):
        return config.get(setting_name, default)

    return default


def validate_settings() -> None:
    """
    Reject unknown keys in the DENDROFLOW settings dictionary.

    Raises:
        ImproperlyConfigured: If an unknown key or a bad generator name is found
    """
    config = getattr(settings, 'DENDROFLOW', None)
    if config is None:
        return
    if not isinstance(config, dict):
        raise ImproperlyConfigured("DENDROFLOW setting must be a dictionary")

    unknown = sorted(set(config) - set(get_default_settings()))
    if unknown:
        raise ImproperlyConfigured(
            f"Unknown DENDROFLOW setting(s): {', '.join(unknown)}"
        )

    generator = config.get('BIT_GENERATOR', 'philox')
    if generator not in BIT_GENERATORS:
        raise ImproperlyConfigured(
            f"DENDROFLOW BIT_GENERATOR must be one of {sorted(BIT_GENERATORS)}"
        )


def make_generator(seed: SeedLike, bit_generator: Optional[str] = None) -> np.random.Generator:
    """
    Build the project random generator for a seed or a (master, index) pair.

    Replicate ``i`` of a run seeded with ``master`` uses ``(master, i)``, so
    streams are independent of how replicates are spread over workers.

    Args:
        seed: Non-negative integer or sequence of non-negative integers
        bit_generator: Generator name; defaults to the BIT_GENERATOR setting

    Returns:
        numpy Generator backed by the configured bit generator
    """
    entropy = [int(seed)] if np.isscalar(seed) else [int(s) for s in seed]
    if any(value < 0 for value in entropy):
        raise DendroflowValidationError(f"Seed must be non-negative: {seed}")

    name = bit_generator or get_dendroflow_setting('BIT_GENERATOR')
    generator_class = BIT_GENERATORS.get(name)
    if generator_class is None:
        raise DendroflowValidationError(f"Unknown bit generator: {name}")

    return np.random.Generator(generator_class(np.random.SeedSequence(entropy)))


def resolve_thread_count(threads: Optional[int] = None) -> int:
    """
    Resolve the worker count: explicit value, then DENDROFLOW_THREADS, then settings.

    A value of 0 means one worker per CPU.
    """
    if threads is None:
        env_value = os.environ.get('DENDROFLOW_THREADS')
        if env_value:
            try:
                threads = int(env_value)
            except ValueError:
                raise DendroflowValidationError(
                    f"DENDROFLOW_THREADS must be an integer, got {env_value!r}"
                )
        else:
            threads = int(get_dendroflow_setting('THREADS'))

    if threads < 0:
        raise DendroflowValidationError(f"Thread count cannot be negative: {threads}")
    if threads == 0:
        threads = os.cpu_count() or 1
    return threads


def validate_positive_int(value: Any, name: str) -> int:
    """
    Validate a strictly positive integer argument.

    Raises:
        DendroflowValidationError: If value is not a positive integer
    """
    if isinstance(value, bool) or not isinstance(value, (int, np.integer)) or value < 1:
        raise DendroflowValidationError(f"{name} must be a positive integer, got {value!r}")
    return int(value)


def validate_probability(value: float, name: str) -> float:
    """
    Validate a probability in [0, 1].

    Raises:
        DendroflowValidationError: If value is outside [0, 1]
    """
    value = float(value)
    if not 0.0 <= value <= 1.0:
        raise DendroflowValidationError(f"{name} must lie in [0, 1], got {value}")
    return value


def validate_rate(value: float, name: str) -> float:
    """
    Validate a strictly positive finite rate or scale.

    Raises:
        DendroflowValidationError: If value is not positive and finite
    """
    value = float(value)
    if not math.isfinite(value) or value <= 0.0:
        raise DendroflowValidationError(f"{name} must be positive, got {value}")
    return value


def format_number(value: float, digits: Optional[int] = None) -> str:
    """Format a number with the configured significant digits for CSV output."""
    if digits is None:
        digits = int(get_dendroflow_setting('CSV_DIGITS'))
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if value is None:
        return ''
    return f"{float(value):.{digits}g}"


def batch_bounds(count: int, batches: int) -> Tuple[Tuple[int, int], ...]:
    """Split ``range(count)`` into at most ``batches`` contiguous, near-equal slices."""
    batches = max(1, min(batches, count))
    edges = np.linspace(0, count, batches + 1).round().astype(int)
    return tuple((int(a), int(b)) for a, b in zip(edges[:-1], edges[1:]) if b > a)

#!/usr/bin/env python3
"""Runtime limits, read from HECKE_* environment variables."""

from __future__ import annotations

import logging
import os
from dataclasses import dataclass

log = logging.getLogger(__name__)

DEFAULT_MAX_ELEMENTS = 50000
DEFAULT_ORDER_BOUND = 24
DEFAULT_GALOIS_CLOSURE = 10000
DEFAULT_RADIUS = 12
DEFAULT_TRANSLATION_RADIUS = 6


def _env_int(name: str, default: int) -> int:
    raw = os.getenv(name, "").strip()
    if not raw:
        return default
    try:
        return int(raw)
    except ValueError:
        log.warning("ignoring %s=%r: not an integer, using %d", name, raw, default)
        return default


@dataclass(frozen=True)
class HeckeConfig:
    """Caps and radii for every finite enumeration in the package."""

    max_elements: int = DEFAULT_MAX_ELEMENTS
    order_bound: int = DEFAULT_ORDER_BOUND
    galois_closure_bound: int = DEFAULT_GALOIS_CLOSURE
    radius: int = DEFAULT_RADIUS
    translation_radius: int = DEFAULT_TRANSLATION_RADIUS
    sample_size: int = 24
    workers: int = 4
    log_level: str = "WARNING"

    @classmethod
    def from_env(cls) -> "HeckeConfig":
        """Create config from environment variables."""
        return cls(
            max_elements=_env_int("HECKE_MAX_ELEMENTS", DEFAULT_MAX_ELEMENTS),
            order_bound=_env_int("HECKE_ORDER_BOUND", DEFAULT_ORDER_BOUND),
            galois_closure_bound=_env_int("HECKE_GALOIS_CLOSURE", DEFAULT_GALOIS_CLOSURE),
            radius=_env_int("HECKE_RADIUS", DEFAULT_RADIUS),
            translation_radius=_env_int("HECKE_TRANSLATION_RADIUS", DEFAULT_TRANSLATION_RADIUS),
            sample_size=_env_int("HECKE_SAMPLE_SIZE", 24),
            workers=max(1, _env_int("HECKE_WORKERS", 4)),
            log_level=(os.getenv("HECKE_LOG_LEVEL", "WARNING").strip().upper() or "WARNING"),
        )

"""
panda_tta/config.py - Defaults, environment configuration, seed substreams

Defaults are plain module constants so experiment code can import them
directly. Runtime knobs that belong to the machine rather than the experiment
(worker count, log verbosity) come from the environment:

    PANDA_THREADS     maximum worker threads (default 1)
    PANDA_LOG_LEVEL   logging level for the CLI (default WARNING)

All randomness flows from one integer seed through named substreams so that,
for example, the negative-augmentation shuffles can be varied without
touching the world or the stream order.
"""

from __future__ import annotations

import logging
import math
import os
import zlib
from dataclasses import dataclass

import numpy as np

# -- experiment defaults ------------------------------------------------------

DEFAULT_PATCH_SIZE = 32
DEFAULT_IMAGE_SIZE = 224
DEFAULT_BETA = 0.5
DEFAULT_LR = 1e-3
DEFAULT_LOGIT_SCALE = 100.0
DEFAULT_BATCH_SIZE = 100
DEFAULT_CHUNK_SIZE = 1000
DEFAULT_STREAM_LEN = 10_000
DEFAULT_MC_SAMPLES = 1_000_000
MIN_MC_SAMPLES = 10_000
MC_SHARD_SIZE = 1 << 17
NEGATIVE_RATIO = 10
PDA_VIEWS = 63

SUBSTREAMS = ("nda", "world", "stream", "mc")

__version__ = "0.1.0"


@dataclass(frozen=True)
class RuntimeConfig:
    """Machine-level settings read from the environment."""

    threads: int = 1
    log_level: str = "WARNING"

    @classmethod
    def from_env(cls) -> "RuntimeConfig":
        raw_threads = os.environ.get("PANDA_THREADS", "1")
        try:
            threads = max(1, int(raw_threads))
        except ValueError:
            threads = 1
        level = os.environ.get("PANDA_LOG_LEVEL", "WARNING").upper()
        return cls(threads=threads, log_level=level)


def configure_logging(level: str | int = "WARNING") -> None:
    """Attach one stderr handler to the ``panda_tta`` logger (CLI use only)."""
    root = logging.getLogger("panda_tta")
    if isinstance(level, str):
        level = logging.getLevelName(level.upper())
        if not isinstance(level, int):
            level = logging.WARNING
    root.setLevel(level)
    if not any(getattr(h, "_panda_cli", False) for h in root.handlers):
        handler = logging.StreamHandler()
        handler.setFormatter(logging.Formatter("%(asctime)s %(levelname)s %(name)s: %(message)s"))
        handler._panda_cli = True  # type: ignore[attr-defined]
        root.addHandler(handler)


def default_m(batch_size: int) -> int:
    """Number of negatives per batch: ``ceil(B / 10)``, never below 1."""
    return max(1, math.ceil(int(batch_size) / NEGATIVE_RATIO))


# -- seed substreams ----------------------------------------------------------


def _name_key(name: str) -> int:
    return zlib.crc32(name.encode("utf-8"))


def substream_seed(seed: int, name: str, *keys: int) -> int:
    """Derive a 63-bit integer seed for the named (and optionally keyed) substream of ``seed``."""
    seq = np.random.SeedSequence([int(seed) & 0xFFFFFFFFFFFFFFFF, _name_key(name), *(int(k) for k in keys)])
    return int(seq.generate_state(1, dtype=np.uint64)[0]) & ((1 << 63) - 1)


def rng_for(seed: int, name: str, *keys: int) -> np.random.Generator:
    """Return a Generator for ``(seed, name, *keys)``, e.g. one per batch index."""
    entropy = [int(seed) & 0xFFFFFFFFFFFFFFFF, _name_key(name), *(int(k) for k in keys)]
    return np.random.default_rng(np.random.SeedSequence(entropy))

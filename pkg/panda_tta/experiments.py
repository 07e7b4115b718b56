"""Headless simulate and sweep runners behind the ``panda`` CLI."""

from __future__ import annotations

import logging
import time
from dataclasses import asdict, dataclass, field, replace
from typing import Any, Sequence

from panda_tta.adaptation import METHODS, AdaptState, StreamResult, run_stream
from panda_tta.config import (
    DEFAULT_BATCH_SIZE,
    DEFAULT_BETA,
    DEFAULT_CHUNK_SIZE,
    DEFAULT_LOGIT_SCALE,
    DEFAULT_LR,
    DEFAULT_STREAM_LEN,
    default_m,
)
from panda_tta.core import InvalidSpec
from panda_tta.metrics import histogram_rows
from panda_tta.nda import pda_forward_count
from panda_tta.world import World, sample_stream

logger = logging.getLogger(__name__)

SWEEP_GRIDS = ("beta", "m-ratio", "batch-size", "lr")
SWEEP_COLUMNS = (
    "grid",
    "value",
    "beta",
    "m",
    "batch_size",
    "lr",
    "accuracy",
    "l1_bias",
    "final_accuracy",
    "final_l1_bias",
    "forward_passes",
)


@dataclass(frozen=True)
class SimulationConfig:
    """Everything that determines one simulated adaptation run on a world."""

    method: str = "tent_panda"
    stream_len: int = DEFAULT_STREAM_LEN
    batch_size: int = DEFAULT_BATCH_SIZE
    chunk_size: int = DEFAULT_CHUNK_SIZE
    beta: float = DEFAULT_BETA
    m: int | None = None
    lr: float = DEFAULT_LR
    ablation: str = "full"
    domain: str = "corruption_0"
    seed: int = 0
    stop_prototype_grad: bool = False
    renormalize: bool = False
    logit_scale: float = DEFAULT_LOGIT_SCALE

    def __post_init__(self) -> None:
        if self.method not in METHODS:
            raise InvalidSpec(f"Unknown method {self.method!r}.\n  Try: one of {', '.join(METHODS)}")
        if self.batch_size < 1 or self.chunk_size < 1:
            raise InvalidSpec(f"batch size and chunk size must be >= 1, got {self.batch_size} and {self.chunk_size}")
        if self.stream_len < 0:
            raise InvalidSpec(f"stream length must be >= 0, got {self.stream_len}")

    @property
    def uses_offset(self) -> bool:
        return self.method in ("panda_only", "tent_panda") and self.ablation != "no_panda"

    @property
    def resolved_m(self) -> int:
        """Negatives one full batch actually gets: none without offsetting, one per image under per_image_shuffle."""
        if not self.uses_offset:
            return 0
        if self.ablation == "per_image_shuffle":
            return self.batch_size
        requested = default_m(self.batch_size) if self.m is None else int(self.m)
        return min(requested, self.batch_size)

    def initial_state(self, dim: int) -> AdaptState:
        return AdaptState.for_method(
            self.method,
            dim,
            batch_size=self.batch_size,
            beta=self.beta,
            m=self.resolved_m,
            lr=self.lr,
            ablation=self.ablation,
            stop_prototype_grad=self.stop_prototype_grad,
            renormalize=self.renormalize,
            logit_scale=self.logit_scale,
        )

    def to_dict(self) -> dict[str, Any]:
        return {**asdict(self), "m": self.resolved_m}


@dataclass
class SimulationReport:
    """Serializable result of :func:`simulate`."""

    config: dict[str, Any]
    per_chunk: list[dict[str, Any]]
    overall: dict[str, Any]
    histogram: list[dict[str, int]]
    forward_passes: int
    forward_ratio_vs_tent: float
    pda_forward_passes: int
    seconds: float = field(default=0.0, compare=False)

    @property
    def final(self) -> dict[str, Any]:
        return self.per_chunk[-1]

    def to_dict(self) -> dict[str, Any]:
        return {
            "config": self.config,
            "per_chunk": self.per_chunk,
            "final": self.final,
            "overall": self.overall,
            "forward_passes": self.forward_passes,
            "forward_ratio_vs_tent": self.forward_ratio_vs_tent,
            "pda_forward_passes": self.pda_forward_passes,
        }


def pda_forwards(stream_len: int, batch_size: int) -> int:
    """Forwards a 63-view positive-augmentation method would spend on the same stream."""
    full, rest = divmod(stream_len, batch_size)
    return full * pda_forward_count(batch_size) + (pda_forward_count(rest) if rest else 0)


def run_simulation(world: World, config: SimulationConfig) -> StreamResult:
    world.check_domain(config.domain)
    stream = sample_stream(world, config.stream_len, config.domain, config.seed)
    state = config.initial_state(world.spec.feature_dim)
    return run_stream(
        state,
        stream,
        world,
        batch_size=config.batch_size,
        chunk_size=config.chunk_size,
        seed=config.seed,
    )


def simulate(world: World, config: SimulationConfig) -> SimulationReport:
    """Sample a stream from ``world`` and adapt over it with ``config.method``."""
    start = time.perf_counter()
    result = run_simulation(world, config)
    seconds = time.perf_counter() - start
    # plain entropy minimization encodes each stream image exactly once
    tent_forwards = config.stream_len
    report = SimulationReport(
        config=config.to_dict(),
        per_chunk=[chunk.to_dict() for chunk in result.chunks],
        overall=result.overall.to_dict(),
        histogram=histogram_rows(result.predictions, world.spec.num_classes),
        forward_passes=result.forward_passes,
        forward_ratio_vs_tent=result.forward_passes / tent_forwards,
        pda_forward_passes=pda_forwards(config.stream_len, config.batch_size),
        seconds=seconds,
    )
    logger.info(
        "simulate method=%s final_accuracy=%.4f final_l1_bias=%.4f forwards=%d (%.3fx tent) in %.2fs",
        config.method,
        report.final["accuracy"],
        report.final["l1_bias"],
        report.forward_passes,
        report.forward_ratio_vs_tent,
        seconds,
    )
    return report


def compare_methods(world: World, config: SimulationConfig, methods: Sequence[str] = METHODS) -> dict[str, SimulationReport]:
    """Paired runs: the same world, stream and negative seeds for every method."""
    return {method: simulate(world, replace(config, method=method)) for method in methods}


def sweep_config(base: SimulationConfig, grid: str, value: float) -> SimulationConfig:
    if grid == "beta":
        return replace(base, beta=float(value))
    if grid == "lr":
        return replace(base, lr=float(value))
    if grid == "m-ratio":
        if not 0.0 < float(value) <= 1.0:
            raise InvalidSpec(f"M/B ratio must be in (0, 1], got {value}\n  Try: --values 0.05,0.1,0.2")
        return replace(base, m=max(1, int(round(float(value) * base.batch_size))))
    if grid == "batch-size":
        return replace(base, batch_size=int(value), m=None)
    raise InvalidSpec(f"Unknown sweep grid {grid!r}.\n  Try: one of {', '.join(SWEEP_GRIDS)}")


def sweep(world: World, base: SimulationConfig, grid: str, values: Sequence[float]) -> list[dict[str, Any]]:
    """One simulation per grid value; returns rows in ``SWEEP_COLUMNS`` order."""
    if not values:
        raise InvalidSpec("A sweep needs at least one value")
    rows = []
    for value in values:
        config = sweep_config(base, grid, value)
        report = simulate(world, config)
        rows.append(
            {
                "grid": grid,
                "value": float(value),
                "beta": config.beta,
                "m": config.resolved_m,
                "batch_size": config.batch_size,
                "lr": config.lr,
                "accuracy": report.overall["accuracy"],
                "l1_bias": report.overall["l1_bias"],
                "final_accuracy": report.final["accuracy"],
                "final_l1_bias": report.final["l1_bias"],
                "forward_passes": report.forward_passes,
            }
        )
    return rows

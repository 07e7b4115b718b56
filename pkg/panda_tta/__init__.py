"""
panda_tta - Negative augmentation and prototype offsetting for test-time adaptation.

Shuffled-patch negatives of a test batch keep its corruption statistics but
lose its class layout. Their mean embedding is a corruption prototype;
subtracting a fraction of it from every test embedding removes the bias a
corruption induces in zero-shot predictions, and the offset embeddings can
drive entropy-minimization adaptation.

Quick start::

    from panda_tta import make_world, preset_spec, sample_stream
    from panda_tta.experiments import SimulationConfig, simulate

    world = make_world(preset_spec("biased", seed=0))
    report = simulate(world, SimulationConfig(method="tent_panda", stream_len=2000))
    print(report.final)
"""

# Public API - the building blocks, importable from one place.
from panda_tta.adaptation import AdaptState, adapt_step, run_stream
from panda_tta.config import __version__
from panda_tta.core import PandaError
from panda_tta.features import TextBank, mean_prototype, offset
from panda_tta.nda import ImageTensor, PatchGrid, negative_augment
from panda_tta.world import WorldSpec, make_world, preset_spec, sample_stream

__all__ = [
    "AdaptState",
    "ImageTensor",
    "PandaError",
    "PatchGrid",
    "TextBank",
    "WorldSpec",
    "__version__",
    "adapt_step",
    "make_world",
    "mean_prototype",
    "negative_augment",
    "offset",
    "preset_spec",
    "run_stream",
    "sample_stream",
]

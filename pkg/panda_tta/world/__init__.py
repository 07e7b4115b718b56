"""Synthetic corruption worlds: image generator, frozen encoder, text bank."""

from .encoder import ForwardCounter, FrozenEncoder
from .presets import PRESET_REGISTRY, preset_spec
from .spec import WorldSpec
from .synthetic import (
    CLEAN,
    LabeledImage,
    PrototypeAlignment,
    World,
    domain_names,
    make_world,
    offset_logits,
    prototype_alignment,
    sample_stream,
    split_stream,
    zero_shot_accuracy,
)

__all__ = [
    "CLEAN",
    "ForwardCounter",
    "FrozenEncoder",
    "LabeledImage",
    "PRESET_REGISTRY",
    "PrototypeAlignment",
    "World",
    "WorldSpec",
    "domain_names",
    "make_world",
    "offset_logits",
    "preset_spec",
    "prototype_alignment",
    "sample_stream",
    "split_stream",
    "zero_shot_accuracy",
]

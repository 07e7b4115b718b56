"""Named world specs used by the CLI and the tests."""

from __future__ import annotations

from typing import Callable, Dict

from panda_tta.core import InvalidSpec

from .spec import WorldSpec


def biased_preset(seed: int = 0) -> WorldSpec:
    """Corruption strongly leaks into class 0's text direction."""
    return WorldSpec(num_classes=10, feature_dim=16, corruption_strength=1.5, spurious_align=0.8, seed=seed)


def clean_preset(seed: int = 0) -> WorldSpec:
    """Same corruption, but no text direction sees it."""
    return WorldSpec(num_classes=10, feature_dim=16, corruption_strength=1.5, spurious_align=0.0, seed=seed)


def separable_preset(seed: int = 0) -> WorldSpec:
    """Two classes, no corruption: zero-shot is perfect."""
    return WorldSpec(num_classes=2, feature_dim=4, corruption_strength=0.0, spurious_align=0.0, seed=seed)


PRESET_REGISTRY: Dict[str, Callable[[int], WorldSpec]] = {
    "biased": biased_preset,
    "clean": clean_preset,
    "separable": separable_preset,
}


def preset_spec(name: str, seed: int = 0) -> WorldSpec:
    try:
        factory = PRESET_REGISTRY[name]
    except KeyError:
        raise InvalidSpec(
            f"Unknown world preset {name!r}.\n  Try: one of {', '.join(sorted(PRESET_REGISTRY))}"
        ) from None
    return factory(seed)

"""Parameters of a synthetic corruption world."""

from __future__ import annotations

from dataclasses import asdict, dataclass, fields
from typing import Any, Mapping

from panda_tta.core import InvalidSpec

# Low-frequency layouts: half-plane frequency pairs with |k|, |l| <= MAX_FREQUENCY,
# each in a cosine and a sine phase.
MAX_FREQUENCY = 2
NUM_LAYOUTS = ((2 * MAX_FREQUENCY + 1) ** 2 - 1) // 2 * 2
MIN_GRID_SIDE = MAX_FREQUENCY + 1


@dataclass(frozen=True)
class WorldSpec:
    """Everything needed to rebuild a world bit-for-bit.

    ``spurious_align`` is the cosine between the corruption feature axis and
    the text direction of class 0; ``corruption_strength`` scales the colour
    shift so that strength 1 at unit intensity matches a class template's norm.
    """

    num_classes: int = 10
    image_size: int = 16
    channels: int = 3
    feature_dim: int = 16
    corruption_strength: float = 1.5
    spurious_align: float = 0.8
    seed: int = 0
    patch_size: int = 4
    num_domains: int = 1

    def __post_init__(self) -> None:
        problems = []
        if self.num_classes < 2:
            problems.append(f"num_classes must be >= 2, got {self.num_classes}")
        if self.num_classes > NUM_LAYOUTS:
            problems.append(f"num_classes must be <= {NUM_LAYOUTS} (distinct low-frequency layouts), got {self.num_classes}")
        if self.feature_dim < self.num_classes + 1:
            problems.append(
                f"feature_dim must be >= num_classes + 1 = {self.num_classes + 1} "
                f"(one axis per class plus the corruption axis), got {self.feature_dim}"
            )
        if self.channels < 1:
            problems.append(f"channels must be >= 1, got {self.channels}")
        if self.patch_size < 1 or self.image_size % max(self.patch_size, 1) != 0:
            problems.append(f"image_size {self.image_size} is not divisible by patch_size {self.patch_size}")
        elif self.image_size // self.patch_size < MIN_GRID_SIDE:
            problems.append(
                f"the patch grid must be at least {MIN_GRID_SIDE}x{MIN_GRID_SIDE}, "
                f"got {self.image_size // self.patch_size}x{self.image_size // self.patch_size}"
            )
        if self.image_size < 2 * MAX_FREQUENCY + 1:
            problems.append(f"image_size must be >= {2 * MAX_FREQUENCY + 1} to hold the class layouts, got {self.image_size}")
        if self.corruption_strength < 0 or self.corruption_strength != self.corruption_strength:
            problems.append(f"corruption_strength must be >= 0, got {self.corruption_strength}")
        if not 0.0 <= self.spurious_align <= 1.0:
            problems.append(f"spurious_align must lie in [0, 1], got {self.spurious_align}")
        if self.num_domains < 1:
            problems.append(f"num_domains must be >= 1, got {self.num_domains}")
        if problems:
            raise InvalidSpec("Invalid world spec:\n  " + "\n  ".join(problems))

    @property
    def image_shape(self) -> tuple[int, int, int]:
        return (self.image_size, self.image_size, self.channels)

    @property
    def pixels(self) -> int:
        return self.image_size * self.image_size * self.channels

    @property
    def corruption_feature(self) -> int:
        """Feature index of the corruption axis (right after the class axes)."""
        return self.num_classes

    def replace(self, **changes: Any) -> "WorldSpec":
        return WorldSpec.from_dict({**self.to_dict(), **changes})

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "WorldSpec":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - set(known))
        if unknown:
            raise InvalidSpec(f"Unknown world spec field(s): {', '.join(unknown)}")
        kwargs: dict[str, Any] = {}
        for name, value in data.items():
            default = getattr(cls, name)
            try:
                kwargs[name] = float(value) if isinstance(default, float) else int(value)
            except (TypeError, ValueError) as exc:
                raise InvalidSpec(f"World spec field {name!r} has invalid value {value!r}") from exc
        return cls(**kwargs)

"""Image tensors and exact non-overlapping patch grids."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

import numpy as np

from panda_tta.core import DimensionMismatch


@dataclass(frozen=True)
class ImageTensor:
    """An ``H x W x C`` dense real image stored row-major (row, col, channel)."""

    data: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.data)
        if arr.ndim == 2:
            arr = arr[..., None]
        if arr.ndim != 3:
            raise DimensionMismatch(f"ImageTensor needs a 3-D (H, W, C) array, got shape {arr.shape}")
        if arr.shape[0] <= 0 or arr.shape[1] <= 0 or arr.shape[2] <= 0:
            raise DimensionMismatch(f"ImageTensor dimensions must be positive, got {arr.shape}")
        object.__setattr__(self, "data", arr)

    @classmethod
    def from_flat(cls, height: int, width: int, channels: int, values: Any) -> "ImageTensor":
        flat = np.asarray(values).reshape(-1)
        expected = int(height) * int(width) * int(channels)
        if flat.size != expected:
            raise DimensionMismatch(
                f"Expected {height}*{width}*{channels} = {expected} values, got {flat.size}"
            )
        return cls(flat.reshape(int(height), int(width), int(channels)))

    @property
    def height(self) -> int:
        return int(self.data.shape[0])

    @property
    def width(self) -> int:
        return int(self.data.shape[1])

    @property
    def channels(self) -> int:
        return int(self.data.shape[2])

    @property
    def shape(self) -> tuple[int, int, int]:
        return (self.height, self.width, self.channels)

    def flat(self) -> np.ndarray:
        return self.data.reshape(-1)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ImageTensor):
            return NotImplemented
        return self.shape == other.shape and bool(np.array_equal(self.data, other.data))


@dataclass(frozen=True)
class PatchGrid:
    """A partition of an ``H x W`` image into ``rows x cols`` patches of ``H_p x W_p``."""

    patch_height: int
    patch_width: int
    rows: int
    cols: int

    def __post_init__(self) -> None:
        if self.patch_height <= 0 or self.patch_width <= 0:
            raise DimensionMismatch("Patch sides must be positive")
        if self.rows < 1 or self.cols < 1:
            raise DimensionMismatch("A patch grid needs at least one row and one column")

    @classmethod
    def for_shape(cls, height: int, width: int, patch_height: int, patch_width: int | None = None) -> "PatchGrid":
        """Build the grid for an ``height x width`` image, rejecting inexact partitions."""
        patch_width = patch_height if patch_width is None else patch_width
        if patch_height <= 0 or patch_width <= 0:
            raise DimensionMismatch("Patch sides must be positive")
        if height % patch_height:
            raise DimensionMismatch(
                f"Patch height {patch_height} does not divide image height {height}.\n"
                f"  Try: a patch size that divides the image, e.g. 32 for 224x224 inputs."
            )
        if width % patch_width:
            raise DimensionMismatch(
                f"Patch width {patch_width} does not divide image width {width}.\n"
                f"  Try: a patch size that divides the image, e.g. 32 for 224x224 inputs."
            )
        return cls(patch_height, patch_width, height // patch_height, width // patch_width)

    @classmethod
    def for_image(cls, image: ImageTensor, patch_height: int, patch_width: int | None = None) -> "PatchGrid":
        return cls.for_shape(image.height, image.width, patch_height, patch_width)

    @property
    def height(self) -> int:
        return self.patch_height * self.rows

    @property
    def width(self) -> int:
        return self.patch_width * self.cols

    @property
    def patches_per_image(self) -> int:
        return self.rows * self.cols

    def check(self, image: ImageTensor) -> None:
        if image.height != self.height or image.width != self.width:
            raise DimensionMismatch(
                f"Grid covers {self.height}x{self.width} but the image is {image.height}x{image.width}"
            )


def patchify(image: ImageTensor, grid: PatchGrid) -> np.ndarray:
    """Cut ``image`` into ``rows * cols`` patches in row-major grid order.

    Returns an array of shape ``(rows * cols, H_p, W_p, C)``.
    """
    grid.check(image)
    c = image.channels
    blocks = image.data.reshape(grid.rows, grid.patch_height, grid.cols, grid.patch_width, c)
    return blocks.transpose(0, 2, 1, 3, 4).reshape(grid.patches_per_image, grid.patch_height, grid.patch_width, c)


def depatchify(patches: np.ndarray, grid: PatchGrid) -> ImageTensor:
    """Place ``rows * cols`` patches back in row-major order; inverse of :func:`patchify`."""
    arr = np.asarray(patches)
    if arr.ndim != 4 or arr.shape[0] != grid.patches_per_image:
        raise DimensionMismatch(
            f"Expected {grid.patches_per_image} patches of shape (H_p, W_p, C), got array of shape {arr.shape}"
        )
    if arr.shape[1] != grid.patch_height or arr.shape[2] != grid.patch_width:
        raise DimensionMismatch(
            f"Patches are {arr.shape[1]}x{arr.shape[2]} but the grid expects "
            f"{grid.patch_height}x{grid.patch_width}"
        )
    c = arr.shape[3]
    blocks = arr.reshape(grid.rows, grid.cols, grid.patch_height, grid.patch_width, c)
    return ImageTensor(blocks.transpose(0, 2, 1, 3, 4).reshape(grid.height, grid.width, c))

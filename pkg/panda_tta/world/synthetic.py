"""Synthetic images where class signal is layout and corruption is pixel statistics.

Each class owns a smooth global 2-D cosine layout. Cutting an image into
patches and shuffling them scrambles the layout: every layout sums to zero
over the tiles of the patch grid, so a shuffled image has no expected
projection on any class. Corruption is a constant colour shift plus i.i.d.
texture with its class-layout component removed, which survives shuffling
unchanged on average and never moves an image along a class axis.

The encoder projects onto the unit class layouts (feature axes ``0..C-1``),
the unit colour shift of the first corruption domain (axis ``C``), and a few
random directions. Text directions are the class axes, except that class 0
leans towards the corruption axis by ``spurious_align``: corrupted images are
then pulled towards class 0, which is the prediction bias offsetting removes.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from panda_tta.config import DEFAULT_BATCH_SIZE, rng_for, substream_seed
from panda_tta.core import EmptyInput, InvalidSpec, UnknownDomain
from panda_tta.features import (
    EmbeddingBatch,
    TextBank,
    batch_logits,
    mean_prototype,
    offset,
)
from panda_tta.nda import ImageTensor, PatchGrid, negative_augment

from .encoder import FrozenEncoder
from .spec import MAX_FREQUENCY, WorldSpec

logger = logging.getLogger(__name__)

CLEAN = "clean"
AMPLITUDE = 1.0
JITTER_SCALE = 0.1
TEXTURE_SCALE = 0.1
INTENSITY_HIGH = 2.0
SPURIOUS_CLASS = 0
SAMPLE_BLOCK = 1024


def domain_names(num_domains: int) -> tuple[str, ...]:
    return (CLEAN, *(f"corruption_{k}" for k in range(num_domains)))


def layout_catalogue(max_frequency: int = MAX_FREQUENCY) -> list[tuple[int, int, float]]:
    """Every ``(k, l, phase)`` layout: half-plane frequencies, cosine and sine phases."""
    pairs = [
        (k, l)
        for k in range(0, max_frequency + 1)
        for l in range(-max_frequency, max_frequency + 1)
        if k > 0 or l > 0
    ]
    return [(k, l, phase) for k, l in pairs for phase in (0.0, math.pi / 2.0)]


def render_layout(k: int, l: int, phase: float, size: int, channels: int) -> np.ndarray:
    """Unit-norm ``cos(2 pi (k h + l w) / size + phase)`` repeated over channels."""
    h = np.arange(size)[:, None]
    w = np.arange(size)[None, :]
    plane = np.cos(2.0 * np.pi * (k * h + l * w) / size + phase)
    image = np.repeat(plane[:, :, None], channels, axis=2)
    return image / np.linalg.norm(image)


def colour_shift(colour: np.ndarray, size: int) -> np.ndarray:
    """Unit-norm image holding ``colour`` at every pixel."""
    image = np.broadcast_to(np.asarray(colour, dtype=float), (size, size, len(colour))).copy()
    return image / np.linalg.norm(image)


@dataclass(frozen=True)
class LabeledImage:
    image: ImageTensor
    label: int
    domain: str


@dataclass(frozen=True)
class World:
    """A built world: encoder, text bank, and the generating patterns."""

    spec: WorldSpec
    encoder: FrozenEncoder
    bank: TextBank
    templates: np.ndarray = field(repr=False)
    layouts: tuple[tuple[int, int, float], ...]
    colours: np.ndarray = field(repr=False)

    @property
    def domains(self) -> tuple[str, ...]:
        return domain_names(self.spec.num_domains)

    @property
    def grid(self) -> PatchGrid:
        return PatchGrid.for_shape(self.spec.image_size, self.spec.image_size, self.spec.patch_size)

    @property
    def class_axes(self) -> np.ndarray:
        return np.eye(self.spec.feature_dim)[: self.spec.num_classes]

    @property
    def corruption_axis(self) -> np.ndarray:
        return np.eye(self.spec.feature_dim)[self.spec.corruption_feature]

    def check_domain(self, domain: str) -> None:
        if domain not in self.domains:
            raise UnknownDomain(f"Unknown domain {domain!r}.\n  Try: one of {', '.join(self.domains)}")

    def corruption_pattern(self, domain: str) -> np.ndarray:
        """Unit colour-shift image of ``domain`` (all zeros for the clean domain)."""
        self.check_domain(domain)
        if domain == CLEAN:
            return np.zeros(self.spec.image_shape)
        index = self.domains.index(domain) - 1
        return colour_shift(self.colours[index], self.spec.image_size)


def make_world(spec: WorldSpec) -> World:
    """Deterministically build the encoder, text bank and patterns of ``spec``."""
    if not isinstance(spec, WorldSpec):
        raise InvalidSpec(f"make_world expects a WorldSpec, got {type(spec).__name__}")
    rng = rng_for(spec.seed, "world")
    catalogue = layout_catalogue()
    chosen = rng.choice(len(catalogue), size=spec.num_classes, replace=False)
    layouts = tuple(catalogue[int(i)] for i in chosen)
    templates = np.stack([render_layout(k, l, ph, spec.image_size, spec.channels) for k, l, ph in layouts])

    colours = rng.standard_normal((spec.num_domains, spec.channels))
    colours /= np.linalg.norm(colours, axis=1, keepdims=True)

    extra = spec.feature_dim - spec.num_classes - 1
    random_rows = rng.standard_normal((extra, spec.pixels))
    if extra:
        random_rows /= np.linalg.norm(random_rows, axis=1, keepdims=True)
    projection = np.vstack(
        [
            templates.reshape(spec.num_classes, -1),
            colour_shift(colours[0], spec.image_size).reshape(1, -1),
            random_rows,
        ]
    )
    encoder = FrozenEncoder.identity_affine(projection, spec.image_shape)

    a = spec.spurious_align
    text = np.zeros((spec.num_classes, spec.feature_dim))
    text[:, : spec.num_classes] = np.eye(spec.num_classes)
    text[SPURIOUS_CLASS, SPURIOUS_CLASS] = math.sqrt(1.0 - a * a)
    text[SPURIOUS_CLASS, spec.corruption_feature] = a
    bank = TextBank(text, tuple(f"class_{c}" for c in range(spec.num_classes)))

    logger.debug("built world seed=%d classes=%d dim=%d layouts=%s", spec.seed, spec.num_classes, spec.feature_dim, layouts)
    return World(spec=spec, encoder=encoder, bank=bank, templates=templates, layouts=layouts, colours=colours)


def sample_stream(world: World, n: int, domain: str, seed: int) -> list[LabeledImage]:
    """``n`` labelled images from ``domain``, balanced over classes, in a seeded order.

    The draws do not depend on the domain, so the same seed gives the same
    labels and jitter in every domain; only the corruption term differs.
    """
    world.check_domain(domain)
    n = int(n)
    if n < 0:
        raise InvalidSpec(f"Stream length must be >= 0, got {n}")
    spec = world.spec
    labels = rng_for(seed, "stream").permutation(np.resize(np.arange(spec.num_classes), n))
    pattern = world.corruption_pattern(domain)
    strength = 0.0 if domain == CLEAN else spec.corruption_strength

    out: list[LabeledImage] = []
    for block, start in enumerate(range(0, n, SAMPLE_BLOCK)):
        block_labels = labels[start : start + SAMPLE_BLOCK]
        size = block_labels.size
        rng = rng_for(seed, "stream", block)
        jitter = JITTER_SCALE * AMPLITUDE * rng.standard_normal((size, *spec.image_shape))
        intensity = rng.uniform(0.0, INTENSITY_HIGH, size)
        texture = off_layout(TEXTURE_SCALE * rng.standard_normal((size, *spec.image_shape)), world.templates)
        images = AMPLITUDE * world.templates[block_labels] + jitter
        images = images + (AMPLITUDE * strength * intensity)[:, None, None, None] * (pattern + texture)
        out.extend(
            LabeledImage(image=ImageTensor(images[i]), label=int(block_labels[i]), domain=domain)
            for i in range(size)
        )
    return out


def off_layout(noise: np.ndarray, templates: np.ndarray) -> np.ndarray:
    """Remove the component of every noise image along the (orthonormal) class layouts."""
    flat = noise.reshape(noise.shape[0], -1)
    basis = templates.reshape(templates.shape[0], -1)
    return (flat - (flat @ basis.T) @ basis).reshape(noise.shape)


def split_stream(stream: Sequence[LabeledImage]) -> tuple[list[ImageTensor], np.ndarray]:
    return [item.image for item in stream], np.array([item.label for item in stream], dtype=int)


def offset_logits(
    world: World,
    images: Sequence[ImageTensor],
    beta: float,
    *,
    m: int | None = None,
    seed: int = 0,
    batch_index: int = 0,
) -> np.ndarray:
    """Zero-shot logits of one batch after offsetting by the batch's negative prototype."""
    encoder = world.encoder
    emb = EmbeddingBatch(encoder.encode_batch(images))
    if beta == 0.0:
        return batch_logits(emb.vectors, world.bank)
    negatives = negative_augment(images, world.grid, m, substream_seed(seed, "nda", batch_index))
    proto = mean_prototype(encoder.encode_batch(negatives))
    return batch_logits(offset(emb, proto, beta).vectors, world.bank)


def zero_shot_accuracy(
    world: World,
    stream: Sequence[LabeledImage],
    beta: float = 0.0,
    *,
    batch_size: int = DEFAULT_BATCH_SIZE,
    m: int | None = None,
    seed: int = 0,
) -> float:
    """Accuracy of the frozen encoder over ``stream`` in batches, optionally offset."""
    if not stream:
        raise EmptyInput("zero_shot_accuracy needs a non-empty stream")
    correct = 0
    for index, start in enumerate(range(0, len(stream), batch_size)):
        images, labels = split_stream(stream[start : start + batch_size])
        preds = np.argmax(offset_logits(world, images, beta, m=m, seed=seed, batch_index=index), axis=1)
        correct += int(np.count_nonzero(preds == labels))
    return correct / len(stream)


@dataclass(frozen=True)
class PrototypeAlignment:
    """Cosines of a prototype with every class axis and with the corruption axis."""

    class_cosines: np.ndarray
    corruption_cosine: float

    @property
    def destroys_semantics(self) -> bool:
        return bool(np.max(np.abs(self.class_cosines)) < self.corruption_cosine)


def prototype_alignment(world: World, n_bar: np.ndarray) -> PrototypeAlignment:
    vec = np.asarray(n_bar, dtype=float)
    unit = vec / np.linalg.norm(vec)
    return PrototypeAlignment(
        class_cosines=world.class_axes @ unit,
        corruption_cosine=float(world.corruption_axis @ unit),
    )

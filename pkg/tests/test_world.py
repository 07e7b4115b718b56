"""
Synthetic world tests.

Coverage:
    1. WorldSpec validation and dict round trip.
    2. Built worlds: determinism, orthonormal layouts that cancel over tiles.
    3. Streams: balanced labels, shared draws across domains.
    4. The frozen encoder and its forward counter.
    5. Bias and its removal: zero-shot vs offset accuracy, the unbiased and
       separable presets, prototype alignment.
"""

from __future__ import annotations

import numpy as np
import pytest

from panda_tta.core import DimensionMismatch, EmptyInput, InvalidSpec, UnknownDomain
from panda_tta.features import mean_prototype
from panda_tta.nda import ImageTensor, negative_augment, patchify
from panda_tta.world import (
    CLEAN,
    PRESET_REGISTRY,
    WorldSpec,
    domain_names,
    make_world,
    preset_spec,
    prototype_alignment,
    sample_stream,
    split_stream,
    zero_shot_accuracy,
)


# ─── 1. WorldSpec ─────────────────────────────────────────────────────────────
class TestWorldSpec:
    def test_defaults_are_valid(self):
        spec = WorldSpec()
        assert spec.image_shape == (16, 16, 3)
        assert spec.corruption_feature == 10

    @pytest.mark.parametrize(
        "changes",
        [
            {"num_classes": 1},
            {"num_classes": 25, "feature_dim": 30},
            {"feature_dim": 10},
            {"patch_size": 5},
            {"patch_size": 8},
            {"spurious_align": 1.5},
            {"corruption_strength": -1.0},
            {"num_domains": 0},
        ],
    )
    def test_invalid(self, changes):
        with pytest.raises(InvalidSpec):
            WorldSpec().replace(**changes)

    def test_problems_are_collected(self):
        with pytest.raises(InvalidSpec) as info:
            WorldSpec(num_classes=1, spurious_align=2.0)
        assert "num_classes" in str(info.value) and "spurious_align" in str(info.value)

    def test_dict_round_trip_and_unknown_keys(self):
        spec = WorldSpec(seed=9, corruption_strength=0.5)
        assert WorldSpec.from_dict(spec.to_dict()) == spec
        with pytest.raises(InvalidSpec):
            WorldSpec.from_dict({"colour": 3})

    def test_presets(self):
        assert set(PRESET_REGISTRY) == {"biased", "clean", "separable"}
        assert preset_spec("clean", 2).spurious_align == 0.0
        with pytest.raises(InvalidSpec) as info:
            preset_spec("noisy")
        assert "Try:" in str(info.value)


# ─── 2. Built worlds ──────────────────────────────────────────────────────────
class TestMakeWorld:
    def test_deterministic(self):
        a = make_world(WorldSpec(seed=4))
        b = make_world(WorldSpec(seed=4))
        c = make_world(WorldSpec(seed=5))
        assert np.array_equal(a.encoder.projection, b.encoder.projection)
        assert np.array_equal(a.bank.vectors, b.bank.vectors)
        assert not np.array_equal(a.encoder.projection, c.encoder.projection)

    def test_templates_are_orthonormal(self, biased_world):
        flat = biased_world.templates.reshape(biased_world.spec.num_classes, -1)
        assert np.allclose(flat @ flat.T, np.eye(biased_world.spec.num_classes), atol=1e-10)

    def test_templates_cancel_over_tiles(self, biased_world):
        for template in biased_world.templates:
            patches = patchify(ImageTensor(template), biased_world.grid)
            assert np.allclose(patches.sum(axis=0), 0.0, atol=1e-10)

    def test_text_bank_leans_towards_corruption(self, biased_world):
        t0 = biased_world.bank.vectors[0]
        assert t0 @ biased_world.corruption_axis == pytest.approx(0.8)
        assert np.allclose(np.linalg.norm(biased_world.bank.vectors, axis=1), 1.0)

    def test_domains(self):
        assert domain_names(2) == ("clean", "corruption_0", "corruption_1")
        world = make_world(WorldSpec(num_domains=2))
        assert world.domains == domain_names(2)
        assert not np.allclose(world.corruption_pattern("corruption_0"), world.corruption_pattern("corruption_1"))
        assert np.count_nonzero(world.corruption_pattern(CLEAN)) == 0

    def test_unknown_domain(self, biased_world):
        with pytest.raises(UnknownDomain) as info:
            biased_world.check_domain("fog")
        assert "Try:" in str(info.value)


# ─── 3. Streams ───────────────────────────────────────────────────────────────
class TestStreams:
    def test_balanced_and_seeded(self, biased_world):
        stream = sample_stream(biased_world, 200, "corruption_0", seed=1)
        _, labels = split_stream(stream)
        assert len(stream) == 200
        assert np.bincount(labels, minlength=10).tolist() == [20] * 10
        again = sample_stream(biased_world, 200, "corruption_0", seed=1)
        assert all(a.image == b.image for a, b in zip(stream, again))

    def test_domains_share_labels_and_jitter(self, biased_world):
        clean = sample_stream(biased_world, 30, CLEAN, seed=2)
        corrupted = sample_stream(biased_world, 30, "corruption_0", seed=2)
        assert [x.label for x in clean] == [x.label for x in corrupted]
        proj_clean = biased_world.encoder.project([x.image for x in clean])
        proj_corr = biased_world.encoder.project([x.image for x in corrupted])
        axes = np.arange(biased_world.spec.num_classes)
        # colour shift and texture are both orthogonal to every class layout
        assert np.allclose(proj_corr[:, axes], proj_clean[:, axes], atol=1e-9)
        assert np.mean(proj_corr[:, biased_world.spec.corruption_feature]) > 1.0

    def test_empty_and_negative_lengths(self, biased_world):
        assert sample_stream(biased_world, 0, CLEAN, seed=0) == []
        with pytest.raises(InvalidSpec):
            sample_stream(biased_world, -1, CLEAN, seed=0)
        with pytest.raises(EmptyInput):
            zero_shot_accuracy(biased_world, [])


# ─── 4. Encoder ───────────────────────────────────────────────────────────────
class TestEncoder:
    def test_counts_forwards(self, biased_world):
        encoder = biased_world.encoder
        images, _ = split_stream(sample_stream(biased_world, 7, CLEAN, seed=0))
        before = encoder.forward_count
        embeddings = encoder.encode_batch(images)
        encoder.encode(images[0])
        assert encoder.forward_count - before == 8
        assert np.allclose(np.linalg.norm(embeddings, axis=1), 1.0)

    def test_with_params_shares_counter(self, biased_world):
        encoder = biased_world.encoder
        other = encoder.with_params(2 * encoder.gamma, encoder.delta + 0.1)
        other.project(ImageTensor(np.zeros(biased_world.spec.image_shape)))
        assert other.forward_count == encoder.forward_count

    def test_rejects_wrong_image_shape(self, biased_world):
        with pytest.raises(DimensionMismatch):
            biased_world.encoder.project([ImageTensor(np.zeros((8, 8, 3)))])


# ─── 5. Bias and its removal ──────────────────────────────────────────────────
class TestBias:
    def test_clean_stream_is_easy(self, biased_world):
        stream = sample_stream(biased_world, 500, CLEAN, seed=3)
        assert zero_shot_accuracy(biased_world, stream) > 0.9

    def test_unbiased_text_bank_makes_corruption_harmless(self):
        world = make_world(preset_spec("clean", 0))
        n = 2000
        clean = zero_shot_accuracy(world, sample_stream(world, n, CLEAN, seed=7))
        corrupted = zero_shot_accuracy(world, sample_stream(world, n, "corruption_0", seed=7))
        pooled = (clean + corrupted) / 2
        std_err = np.sqrt(pooled * (1 - pooled) / n)
        assert abs(clean - corrupted) <= 3 * std_err + 1e-12

    @pytest.mark.parametrize("domain", [CLEAN, "corruption_0"])
    def test_separable_preset_is_perfect(self, domain):
        world = make_world(preset_spec("separable", 1))
        assert zero_shot_accuracy(world, sample_stream(world, 1000, domain, seed=2)) == 1.0

    def test_offset_recovers_corrupted_accuracy(self, biased_world):
        stream = sample_stream(biased_world, 1000, "corruption_0", seed=3)
        plain = zero_shot_accuracy(biased_world, stream)
        offset = zero_shot_accuracy(biased_world, stream, 0.5)
        assert plain < 0.7
        assert offset > plain + 0.15

    def test_corruption_leans_predictions_to_class_zero(self, biased_world):
        stream = sample_stream(biased_world, 500, "corruption_0", seed=4)
        images, _ = split_stream(stream)
        preds = np.argmax(biased_world.encoder.encode_batch(images) @ biased_world.bank.vectors.T, axis=1)
        assert np.mean(preds == 0) > 0.3

    def test_negative_prototype_tracks_corruption(self, biased_world):
        images, _ = split_stream(sample_stream(biased_world, 100, "corruption_0", seed=6))
        negatives = negative_augment(images, biased_world.grid, None, seed=6)
        proto = mean_prototype(biased_world.encoder.encode_batch(negatives))
        alignment = prototype_alignment(biased_world, proto.n_bar)
        assert alignment.destroys_semantics
        assert alignment.corruption_cosine > 0.5

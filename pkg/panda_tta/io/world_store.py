"""World directories: ``spec.json``, ``projection.tns``, ``textbank.tns``."""

from __future__ import annotations

import json
import os
from dataclasses import replace
from pathlib import Path

from panda_tta.core import InvalidSpec, ParseError
from panda_tta.features import TextBank
from panda_tta.world import FrozenEncoder, World, WorldSpec, make_world

from .tensors import read_matrix, write_tns

SPEC_FILE = "spec.json"
PROJECTION_FILE = "projection.tns"
TEXTBANK_FILE = "textbank.tns"


def save_world(world: World, directory: os.PathLike | str) -> Path:
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    (out / SPEC_FILE).write_text(json.dumps(world.spec.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    write_tns(out / PROJECTION_FILE, world.encoder.projection)
    write_tns(out / TEXTBANK_FILE, world.bank.vectors)
    return out


def load_spec(directory: os.PathLike | str) -> WorldSpec:
    path = Path(directory) / SPEC_FILE
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError as exc:
        raise ParseError(f"{path}: missing; is {directory} a world directory?\n  Try: panda world-make --out {directory}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from exc
    if not isinstance(data, dict):
        raise ParseError(f"{path}: expected a JSON object")
    return WorldSpec.from_dict(data)


def load_world(directory: os.PathLike | str) -> World:
    """Rebuild the generator from ``spec.json`` and take the encoder and text bank from disk."""
    directory = Path(directory)
    spec = load_spec(directory)
    world = make_world(spec)
    projection = read_matrix(directory / PROJECTION_FILE)
    text = read_matrix(directory / TEXTBANK_FILE)
    if projection.shape != world.encoder.projection.shape:
        raise InvalidSpec(f"{PROJECTION_FILE} has shape {projection.shape}, spec implies {world.encoder.projection.shape}")
    if text.shape != world.bank.vectors.shape:
        raise InvalidSpec(f"{TEXTBANK_FILE} has shape {text.shape}, spec implies {world.bank.vectors.shape}")
    encoder = FrozenEncoder.identity_affine(projection, spec.image_shape)
    bank = TextBank(text, world.bank.class_names)
    return replace(world, encoder=encoder, bank=bank)

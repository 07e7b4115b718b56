"""panda_tta.io - tensor codecs, world directories, manifests, report writers.

``canonical_json`` / ``canonical_hash`` are the single source of truth for
hashing run inputs.
"""

from panda_tta.io.manifest import (
    MANIFEST_FILE,
    SCHEMA_VERSION,
    RunManifest,
    canonical_hash,
    canonical_json,
    run_hash,
)
from panda_tta.io.reports import jsonable, read_csv, write_csv, write_json
from panda_tta.io.tensors import decode_ppm, decode_tns, encode_tns, read_image, read_matrix, write_tns
from panda_tta.io.world_store import load_spec, load_world, save_world

__all__ = [
    "MANIFEST_FILE",
    "RunManifest",
    "SCHEMA_VERSION",
    "canonical_hash",
    "canonical_json",
    "decode_ppm",
    "decode_tns",
    "encode_tns",
    "jsonable",
    "load_spec",
    "load_world",
    "read_csv",
    "read_image",
    "read_matrix",
    "run_hash",
    "save_world",
    "write_csv",
    "write_json",
    "write_tns",
]

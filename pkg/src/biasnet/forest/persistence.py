"""Binary container for trained forests.

Layout::

    b"BNFOREST" | uint16 version | uint32 header length | JSON header | npz payload

The header carries the config, the feature schema and its hash; the payload
holds the concatenated tree arrays and is read with ``allow_pickle=False``.
"""

import io
import json
import logging
from pathlib import Path
import struct
import zipfile

import numpy as np

from biasnet.errors import ArtifactFormatError, SchemaMismatchError
from biasnet.features.vector import schema_hash
from biasnet.forest.forest import Forest, TreeArrays
from biasnet.forest.models import ForestConfig

logger = logging.getLogger(__name__)

MAGIC = b"BNFOREST"
FORMAT_VERSION = 1
_PREFIX = struct.Struct("<HI")

_TREE_FIELDS = ("left", "right", "feature", "threshold", "value")


def forest_to_bytes(forest: Forest) -> bytes:
    offsets = np.zeros(forest.n_trees + 1, dtype=np.int64)
    offsets[1:] = np.cumsum([t.n_nodes for t in forest.trees])
    arrays: dict[str, np.ndarray] = {"node_offsets": offsets}
    for name in _TREE_FIELDS:
        arrays[name] = np.concatenate([getattr(t, name) for t in forest.trees])
    arrays["oob_mask"] = np.packbits(forest.oob_mask, axis=1)
    if forest.train_x is not None and forest.train_y is not None:
        arrays["train_x"] = forest.train_x
        arrays["train_y"] = forest.train_y
    if forest.classes is not None:
        arrays["classes"] = np.asarray(forest.classes)

    header = {
        "format_version": FORMAT_VERSION,
        "config": forest.config.model_dump(mode="json"),
        "feature_names": forest.feature_names,
        "schema_hash": schema_hash(forest.feature_names),
        "n_trees": forest.n_trees,
        "n_train": int(forest.oob_mask.shape[1]),
        "arrays": sorted(arrays),
    }
    header_bytes = json.dumps(header, sort_keys=True).encode("utf-8")

    payload = io.BytesIO()
    np.savez_compressed(payload, **arrays)
    return MAGIC + _PREFIX.pack(FORMAT_VERSION, len(header_bytes)) + header_bytes + payload.getvalue()


def read_header(blob: bytes) -> tuple[dict, int]:
    """Parse the container header; returns it with the payload offset.

    Raises:
        ArtifactFormatError: On a bad magic, unsupported version or unreadable header.
    """
    if not blob.startswith(MAGIC):
        raise ArtifactFormatError("not a forest container (bad magic)")
    start = len(MAGIC)
    try:
        version, header_len = _PREFIX.unpack_from(blob, start)
    except struct.error as e:
        raise ArtifactFormatError("truncated forest container") from e
    if version != FORMAT_VERSION:
        raise ArtifactFormatError(f"unsupported forest format version {version}")
    body = start + _PREFIX.size
    try:
        header = json.loads(blob[body : body + header_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise ArtifactFormatError(f"corrupt forest header: {e}") from e
    return header, body + header_len


def forest_from_bytes(blob: bytes, expected_schema_hash: str | None = None) -> Forest:
    """Rebuild a forest, optionally checking it against the caller's feature schema.

    Raises:
        ArtifactFormatError: If the container is malformed.
        SchemaMismatchError: If the stored schema hash differs from ``expected_schema_hash``.
    """
    header, offset = read_header(blob)
    names = header.get("feature_names")
    stored_hash = header.get("schema_hash")
    if not isinstance(names, list) or schema_hash(names) != stored_hash:
        raise ArtifactFormatError("forest header schema hash does not match its feature names")
    if expected_schema_hash is not None and stored_hash != expected_schema_hash:
        raise SchemaMismatchError(
            f"forest was trained on schema {stored_hash}, expected {expected_schema_hash}"
        )

    try:
        with np.load(io.BytesIO(blob[offset:]), allow_pickle=False) as npz:
            arrays = {name: npz[name] for name in npz.files}
    except (OSError, ValueError, zipfile.BadZipFile) as e:
        raise ArtifactFormatError(f"corrupt forest payload: {e}") from e
    missing = {"node_offsets", "oob_mask", *_TREE_FIELDS} - set(arrays)
    if missing:
        raise ArtifactFormatError(f"forest payload lacks arrays: {sorted(missing)}")

    try:
        config = ForestConfig.model_validate(header["config"])
        n_train = int(header["n_train"])
        n_trees = int(header["n_trees"])
    except (KeyError, TypeError, ValueError) as e:
        raise ArtifactFormatError(f"incomplete forest header: {e}") from e
    offsets = arrays["node_offsets"]
    if offsets.size != n_trees + 1:
        raise ArtifactFormatError(f"header lists {n_trees} trees, payload holds {offsets.size - 1}")
    trees = [
        TreeArrays(**{name: arrays[name][offsets[t] : offsets[t + 1]] for name in _TREE_FIELDS})
        for t in range(n_trees)
    ]
    oob_mask = np.unpackbits(arrays["oob_mask"], axis=1, count=n_train).astype(bool)
    return Forest(
        config=config,
        feature_names=names,
        trees=trees,
        oob_mask=oob_mask,
        train_x=arrays.get("train_x"),
        train_y=arrays.get("train_y"),
        classes=arrays.get("classes"),
    )


def save_forest(forest: Forest, path: Path) -> None:
    path = Path(path)
    path.write_bytes(forest_to_bytes(forest))
    logger.debug(f"Saved {forest.config.task.value} forest with {forest.n_trees} trees to {path}")


def load_forest(path: Path, expected_schema_hash: str | None = None) -> Forest:
    return forest_from_bytes(Path(path).read_bytes(), expected_schema_hash)

"""Dataset files, embedding export, model checkpoints, and flat config files.

Canonical edge-list format: one `u v [w]` per line, whitespace separated,
`#` comments ignored. Label files hold `node_id class_id` per line; node
dictionaries hold `original_id dense_id` per line.
"""

import os
import struct
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .graph import Graph
from .oselm import OselmModel
from .sgd import SgdModel

_CKPT_MAGIC = b"SEQEMBD1"
_CKPT_VERSION = 1
_HEADER = struct.Struct("<8sIIIIIId")  # magic, version, model_type, d, V, mode, flags, scalar
_MODEL_OSELM = 1
_MODEL_SGD = 2


@dataclass
class DatasetBundle:
    """Paths of one dataset: canonical edges, labels, node dictionary."""

    edges: Path
    labels: Path | None = None
    dictionary: Path | None = None
    name: str = "custom"


class DatasetFormatError(ValueError):
    """Malformed dataset file; message carries the offending line number."""


def atomic_write(path, write_fn, mode="w"):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".")
    try:
        with os.fdopen(fd, mode) as fh:
            write_fn(fh)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _data_lines(path):
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if line:
                yield lineno, line


def load_dataset(bundle: DatasetBundle):
    """Load (Graph, labels, dictionary) with dense node ids.

    When the bundle carries a persisted node dictionary it is authoritative;
    otherwise dense ids follow first appearance in the edge file. Duplicate
    edges (either direction) are stored once. Labels, when present, must
    cover exactly the node set.
    """
    fixed = bundle.dictionary is not None and Path(bundle.dictionary).exists()
    mapping: dict[str, int] = load_node_dictionary(bundle.dictionary) if fixed else {}
    edges: list[tuple[int, int, float]] = []
    seen: set[tuple[int, int]] = set()

    def dense(tok: str) -> int:
        if tok not in mapping:
            if fixed:
                raise DatasetFormatError(
                    f"{bundle.edges}: node {tok!r} missing from {bundle.dictionary}")
            mapping[tok] = len(mapping)
        return mapping[tok]

    for lineno, line in _data_lines(bundle.edges):
        parts = line.split()
        if len(parts) not in (2, 3):
            raise DatasetFormatError(
                f"{bundle.edges}:{lineno}: expected 'u v [w]', got {line!r}")
        try:
            w = float(parts[2]) if len(parts) == 3 else 1.0
        except ValueError:
            raise DatasetFormatError(
                f"{bundle.edges}:{lineno}: bad weight {parts[2]!r}") from None
        u, v = dense(parts[0]), dense(parts[1])
        key = (min(u, v), max(u, v))
        if u != v and key in seen:
            continue
        seen.add(key)
        edges.append((u, v, w))
    if not edges:
        raise DatasetFormatError(f"{bundle.edges}: no edges found")

    node_count = max(mapping.values()) + 1 if fixed else len(mapping)
    g = Graph.from_edges(node_count, edges)

    labels = None
    if bundle.labels is not None:
        labels = np.full(g.node_count, -1, dtype=np.int64)
        for lineno, line in _data_lines(bundle.labels):
            parts = line.split()
            if len(parts) != 2:
                raise DatasetFormatError(
                    f"{bundle.labels}:{lineno}: expected 'node_id class_id', got {line!r}")
            if parts[0] not in mapping:
                raise DatasetFormatError(
                    f"{bundle.labels}:{lineno}: label for unknown node {parts[0]!r}")
            labels[mapping[parts[0]]] = int(parts[1])
        unlabeled = int((labels < 0).sum())
        if unlabeled:
            raise DatasetFormatError(
                f"{bundle.labels}: {unlabeled} nodes have no label")
    return g, labels, mapping


def save_node_dictionary(mapping: dict, path):
    atomic_write(path, lambda fh: fh.writelines(
        f"{orig} {dense}\n" for orig, dense in sorted(mapping.items(), key=lambda kv: kv[1])))


def load_node_dictionary(path) -> dict:
    mapping = {}
    for lineno, line in _data_lines(path):
        parts = line.split()
        if len(parts) != 2:
            raise DatasetFormatError(f"{path}:{lineno}: expected 'original dense'")
        mapping[parts[0]] = int(parts[1])
    return mapping


def _dense_to_original(mapping: dict, node_count: int) -> list:
    inverse = [None] * node_count
    for orig, dense in mapping.items():
        inverse[dense] = orig
    if any(o is None for o in inverse):
        raise ValueError("node dictionary does not cover all dense ids")
    return inverse


def export_embedding(snapshot: np.ndarray, mapping: dict, path):
    """Write `V d` then one `original_id v_1 .. v_d` line per node,
    9 significant digits."""
    snapshot = np.asarray(snapshot)
    if not np.all(np.isfinite(snapshot)):
        raise ValueError("embedding contains non-finite entries")
    inverse = _dense_to_original(mapping, snapshot.shape[0])

    def write(fh):
        fh.write(f"{snapshot.shape[0]} {snapshot.shape[1]}\n")
        for dense, orig in enumerate(inverse):
            vals = " ".join(f"{x:.9g}" for x in snapshot[dense])
            fh.write(f"{orig} {vals}\n")

    atomic_write(path, write)


def import_embedding(path, mapping: dict | None = None):
    """Read an embedding file back as ((V, d) array, original-id list).

    Rows are ordered by dense id when a dictionary is given, otherwise by
    file order.
    """
    with open(path) as fh:
        header = fh.readline().split()
        if len(header) != 2:
            raise DatasetFormatError(f"{path}:1: expected 'V d' header")
        v, d = int(header[0]), int(header[1])
        ids, rows = [], []
        for lineno, raw in enumerate(fh, start=2):
            parts = raw.split()
            if not parts:
                continue
            if len(parts) != d + 1:
                raise DatasetFormatError(
                    f"{path}:{lineno}: expected {d + 1} fields, got {len(parts)}")
            ids.append(parts[0])
            rows.append([float(x) for x in parts[1:]])
    if len(rows) != v:
        raise DatasetFormatError(f"{path}: header says {v} rows, found {len(rows)}")
    arr = np.array(rows, dtype=np.float64)
    if mapping is not None:
        order = np.argsort([mapping[i] for i in ids], kind="stable")
        arr = arr[order]
        ids = [ids[i] for i in order]
    return arr, ids


def save_checkpoint(model, path):
    """Binary checkpoint: fixed header then row-major little-endian f64 arrays."""
    if isinstance(model, OselmModel):
        mode_code = 0 if model.mode == "tied" else 1
        flags = 1 if model.regularized else 0
        header = _HEADER.pack(_CKPT_MAGIC, _CKPT_VERSION, _MODEL_OSELM,
                              model.dims, model.node_count, mode_code, flags, model.mu)
        blobs = [model.beta, model.p]
        if model.alpha is not None:
            blobs.append(model.alpha)
    elif isinstance(model, SgdModel):
        header = _HEADER.pack(_CKPT_MAGIC, _CKPT_VERSION, _MODEL_SGD,
                              model.dims, model.node_count, 0, 0, model.lr)
        blobs = [model.w_in, model.w_out]
    else:
        raise TypeError(f"cannot checkpoint {type(model).__name__}")

    def write(fh):
        fh.write(header)
        for arr in blobs:
            fh.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())

    atomic_write(path, write, mode="wb")


def load_checkpoint(path):
    with open(path, "rb") as fh:
        raw = fh.read(_HEADER.size)
        if len(raw) < _HEADER.size:
            raise DatasetFormatError(f"{path}: truncated checkpoint header")
        magic, version, model_type, d, v, mode_code, flags, scalar = _HEADER.unpack(raw)
        if magic != _CKPT_MAGIC:
            raise DatasetFormatError(f"{path}: bad magic {magic!r}")
        if version != _CKPT_VERSION:
            raise DatasetFormatError(f"{path}: unsupported version {version}")

        def read_arr(shape):
            n = int(np.prod(shape))
            buf = fh.read(8 * n)
            if len(buf) != 8 * n:
                raise DatasetFormatError(f"{path}: truncated array data")
            return np.frombuffer(buf, dtype="<f8").reshape(shape).astype(np.float64)

        if model_type == _MODEL_OSELM:
            # beta is stored row-major (d, V); keep it transposed in memory
            # to match the training kernels' layout
            beta = np.asfortranarray(read_arr((d, v)))
            p = read_arr((d, d))
            mode = "tied" if mode_code == 0 else "random_alpha"
            alpha = read_arr((v, d)) if mode == "random_alpha" else None
            return OselmModel(beta=beta, p=p, mu=scalar, mode=mode, alpha=alpha,
                              regularized=bool(flags & 1))
        if model_type == _MODEL_SGD:
            return SgdModel(w_in=read_arr((v, d)), w_out=read_arr((v, d)), lr=scalar)
        raise DatasetFormatError(f"{path}: unknown model type {model_type}")


def parse_config_file(path) -> dict:
    """Flat `key = value` config text; returns raw string values."""
    values = {}
    for lineno, line in _data_lines(path):
        if "=" not in line:
            raise DatasetFormatError(f"{path}:{lineno}: expected 'key = value'")
        key, _, val = line.partition("=")
        values[key.strip()] = val.strip()
    return values

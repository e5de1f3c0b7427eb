"""Versioned binary model container.

Layout: magic "CSIM1", kind tag, a key=value config text block, then
little-endian float64 tensor payloads with per-tensor shape headers, and a
trailing SHA-256 checksum of everything before it. Loading a saved model
reproduces its predictions bit for bit.
"""
from __future__ import annotations

import hashlib
import json
import struct
from pathlib import Path

import numpy as np

from .errors import CorruptContainer, VersionMismatch
from .models import ModelKind, TrainedModel

MAGIC = b"CSIM1"
_CHECKSUM_LEN = 32


def _config_block(model: TrainedModel) -> bytes:
    lines = []
    for key in sorted(model.preprocess):
        lines.append(f"p.{key}={json.dumps(model.preprocess[key])}")
    for key in sorted(model.meta):
        lines.append(f"m.{key}={json.dumps(model.meta[key])}")
    return ("\n".join(lines) + "\n").encode("utf-8")


def _parse_config(block: bytes) -> tuple[dict, dict]:
    preprocess: dict = {}
    meta: dict = {}
    for line in block.decode("utf-8").splitlines():
        if not line:
            continue
        key, _, raw = line.partition("=")
        value = json.loads(raw)
        if key.startswith("p."):
            preprocess[key[2:]] = value
        elif key.startswith("m."):
            meta[key[2:]] = value
        else:
            raise CorruptContainer(f"unknown config namespace in {key!r}")
    return preprocess, meta


def save_model(model: TrainedModel, path: str | Path) -> None:
    out = bytearray()
    out += MAGIC
    kind = model.kind.value.encode("utf-8")
    out += struct.pack("<B", len(kind))
    out += kind
    config = _config_block(model)
    out += struct.pack("<I", len(config))
    out += config
    out += struct.pack("<I", len(model.params))
    for name in sorted(model.params):
        arr = np.ascontiguousarray(model.params[name], dtype=np.float64)
        nb = name.encode("utf-8")
        out += struct.pack("<H", len(nb))
        out += nb
        out += struct.pack("<B", arr.ndim)
        for dim in arr.shape:
            out += struct.pack("<Q", dim)
        out += arr.astype("<f8").tobytes()
    digest = hashlib.sha256(bytes(out)).digest()
    out += digest
    Path(path).write_bytes(bytes(out))


class _Reader:
    def __init__(self, buf: bytes):
        self.buf = buf
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.buf):
            raise CorruptContainer("container truncated")
        chunk = self.buf[self.pos : self.pos + n]
        self.pos += n
        return chunk

    def unpack(self, fmt: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))[0]


def load_model(path: str | Path) -> TrainedModel:
    blob = Path(path).read_bytes()
    if len(blob) < len(MAGIC) + _CHECKSUM_LEN:
        raise CorruptContainer(f"{path}: too short to be a model container")
    if blob[: len(MAGIC)] != MAGIC:
        raise VersionMismatch(f"{path}: bad magic bytes")
    body, checksum = blob[:-_CHECKSUM_LEN], blob[-_CHECKSUM_LEN:]
    if hashlib.sha256(body).digest() != checksum:
        raise CorruptContainer(f"{path}: checksum mismatch")

    reader = _Reader(body)
    reader.take(len(MAGIC))
    kind_len = reader.unpack("<B")
    try:
        kind = ModelKind(reader.take(kind_len).decode("utf-8"))
    except ValueError as exc:
        raise VersionMismatch(f"{path}: unknown model kind: {exc}")
    config_len = reader.unpack("<I")
    preprocess, meta = _parse_config(reader.take(config_len))
    n_tensors = reader.unpack("<I")
    params: dict[str, np.ndarray] = {}
    for _ in range(n_tensors):
        name_len = reader.unpack("<H")
        name = reader.take(name_len).decode("utf-8")
        ndim = reader.unpack("<B")
        shape = tuple(reader.unpack("<Q") for _ in range(ndim))
        count = int(np.prod(shape)) if shape else 1
        data = np.frombuffer(reader.take(8 * count), dtype="<f8").reshape(shape)
        params[name] = np.array(data, dtype=np.float64)
    if reader.pos != len(body):
        raise CorruptContainer(f"{path}: trailing bytes in container")
    return TrainedModel(kind=kind, params=params, preprocess=preprocess, meta=meta)

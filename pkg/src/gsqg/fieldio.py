"""Binary field files: a fixed little-endian header followed by float64 samples.

Layout (little-endian)::

    magic  4s   b"GFLD"
    version u32 (= 1)
    nx, ny  u32
    ncomp   u32 (1 scalar, 2 vector)
    length  f64
    time    f64
    payload nx*ny*ncomp f64, component-major then row-major
"""
from __future__ import annotations

import os
import struct
from dataclasses import dataclass

import numpy as np

from .errors import BadLength, BadMagic, BadVersion, FieldFileError

MAGIC = b"GFLD"
VERSION = 1
HEADER = struct.Struct("<4sIIIIdd")


@dataclass
class FieldFile:
    values: np.ndarray     # (nx, ny) or (ncomp, nx, ny)
    length: float
    time: float

    @property
    def ncomp(self) -> int:
        return 1 if self.values.ndim == 2 else self.values.shape[0]


def write_field(path: str | os.PathLike, values: np.ndarray, length: float = 2 * np.pi,
                time: float = 0.0) -> None:
    values = np.asarray(values, dtype="<f8")
    if values.ndim == 2:
        ncomp, (nx, ny) = 1, values.shape
    elif values.ndim == 3:
        ncomp, nx, ny = values.shape
    else:
        raise FieldFileError(f"expected a 2-D scalar or (ncomp, nx, ny) array, got shape {values.shape}")
    with open(path, "wb") as fh:
        fh.write(HEADER.pack(MAGIC, VERSION, nx, ny, ncomp, float(length), float(time)))
        fh.write(np.ascontiguousarray(values).tobytes())


def read_field(path: str | os.PathLike) -> FieldFile:
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < 4 or raw[:4] != MAGIC:
        raise BadMagic(f"{path}: not a field file")
    if len(raw) < HEADER.size:
        raise BadLength(f"{path}: truncated header ({len(raw)} bytes)")
    magic, version, nx, ny, ncomp, length, time = HEADER.unpack_from(raw)
    if version != VERSION:
        raise BadVersion(f"{path}: unsupported version {version}")
    expected = nx * ny * ncomp * 8
    payload = raw[HEADER.size:]
    if len(payload) != expected:
        raise BadLength(f"{path}: payload has {len(payload)} bytes, header implies {expected}")
    values = np.frombuffer(payload, dtype="<f8").astype(float)
    shape = (nx, ny) if ncomp == 1 else (ncomp, nx, ny)
    return FieldFile(values.reshape(shape), length, time)

"""Streaming writer for the NFTE embedding container.

Layout (little-endian): magic "NFTE", version u32 = 1, count u64, dim
u64, then one record per embedding: id length u16, id UTF-8 bytes, dim
consecutive f32 values.  The count is not known until the last image has
been processed (undecodable inputs are skipped), so the writer streams
records and patches the count field on close.
"""

import struct

import numpy as np

MAGIC = b"NFTE"
VERSION = 1
_HEADER = struct.Struct("<4sIQQ")
_COUNT_OFFSET = 8


class NfteWriter:
    """Single-writer append interface; use as a context manager."""

    def __init__(self, path, dim: int):
        if dim < 1:
            raise ValueError("dim must be >= 1")
        self.dim = dim
        self.count = 0
        self._seen: set[str] = set()
        self._fh = open(path, "wb")
        self._fh.write(_HEADER.pack(MAGIC, VERSION, 0, dim))

    def add(self, token_id: str, vector: np.ndarray) -> None:
        raw = token_id.encode("utf-8")
        if not 1 <= len(raw) <= 0xFFFF:
            raise ValueError(f"id length {len(raw)} out of range")
        if token_id in self._seen:
            raise ValueError(f"duplicate id {token_id!r}")
        arr = np.ascontiguousarray(vector, dtype=np.float32)
        if arr.shape != (self.dim,):
            raise ValueError(f"vector shape {arr.shape}, want ({self.dim},)")
        if not np.all(np.isfinite(arr)):
            raise ValueError(f"non-finite value in vector for {token_id!r}")
        self._fh.write(struct.pack("<H", len(raw)))
        self._fh.write(raw)
        self._fh.write(arr.tobytes())
        self._seen.add(token_id)
        self.count += 1

    def close(self) -> None:
        if self._fh.closed:
            return
        self._fh.seek(_COUNT_OFFSET)
        self._fh.write(struct.pack("<Q", self.count))
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

"""NEOD dataset files: (window, label) training pairs.

Little-endian header: magic "NEOD" (4 bytes), version u16, d u16, K u8,
shape u8 (0 = single, 1 = merged), record_count u64, p_train f32, seed u64.
Each record holds the 2K+2 window planes then the 4 label planes, every plane
bit-packed MSB-first in row-major order and padded to a byte boundary.

Records are generated run by run: a run samples T cycles of noise, and each
of its T target layers yields one record whose labels are the true data
errors and measurement flips of that layer.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .lattice import (
    CodeLayout,
    NoiseParams,
    PatchShape,
    build_layout,
    build_ls_schedule,
    extract_detection,
    sample_errors,
)
from .nn import build_window

MAGIC = b"NEOD"
VERSION = 1

_HEADER = struct.Struct("<4sHHBBQfQ")


class NeodError(ValueError):
    pass


@dataclass
class DatasetInfo:
    d: int
    K: int
    shape: PatchShape
    record_count: int
    p_train: float
    seed: int
    height: int
    width: int

    @property
    def window_channels(self) -> int:
        return 2 * self.K + 2


def _plane_bytes(H: int, W: int) -> int:
    return (H * W + 7) // 8


def _pack_plane(plane: np.ndarray) -> bytes:
    return np.packbits(plane.astype(np.uint8).reshape(-1)).tobytes()


def _unpack_plane(buf: bytes, H: int, W: int) -> np.ndarray:
    bits = np.unpackbits(np.frombuffer(buf, dtype=np.uint8))[: H * W]
    return bits.reshape(H, W)


def record_stream(layout: CodeLayout, K: int, p: float, seed: int, sched=None):
    """Yields (window, labels) pairs indefinitely; labels are uint8 planes
    (x errors, z errors, X-ancilla flips, Z-ancilla flips) of the target layer."""
    T = sched.total_cycles if sched is not None else layout.d
    run = 0
    while True:
        tab = sample_errors(layout, NoiseParams(p=p, seed=seed, trial_index=run), T, sched)
        vol = extract_detection(layout, tab, sched)
        for t in range(T):
            window = build_window(vol, layout, t, K)
            labels = np.stack(
                [
                    tab.x[t].astype(np.uint8),
                    tab.z[t].astype(np.uint8),
                    (tab.mf[t] & layout.ancx_mask).astype(np.uint8),
                    (tab.mf[t] & layout.ancz_mask).astype(np.uint8),
                ]
            )
            yield window, labels
        run += 1


def write_dataset(
    path,
    d: int,
    K: int,
    shape: PatchShape,
    records: int,
    p_train: float,
    seed: int,
) -> DatasetInfo:
    layout = build_layout(d, shape)
    sched = build_ls_schedule(d) if shape is PatchShape.MERGED_ROUGH else None
    H, W = layout.grid_rows, layout.grid_cols
    shape_code = 0 if shape is PatchShape.SINGLE else 1
    stream = record_stream(layout, K, p_train, seed, sched)
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION, d, K, shape_code, records, p_train, seed))
        for _ in range(records):
            window, labels = next(stream)
            for plane in window:
                fh.write(_pack_plane(plane))
            for plane in labels:
                fh.write(_pack_plane(plane))
    return DatasetInfo(d, K, shape, records, p_train, seed, H, W)


def read_header(path) -> DatasetInfo:
    with open(path, "rb") as fh:
        head = fh.read(_HEADER.size)
    if len(head) < _HEADER.size:
        raise NeodError("file too short for a header")
    magic, version, d, K, shape_code, count, p_train, seed = _HEADER.unpack(head)
    if magic != MAGIC:
        raise NeodError(f"bad magic {magic!r}")
    if version != VERSION:
        raise NeodError(f"unsupported version {version}")
    shape = PatchShape.SINGLE if shape_code == 0 else PatchShape.MERGED_ROUGH
    layout = build_layout(d, shape)
    return DatasetInfo(d, K, shape, count, p_train, seed, layout.grid_rows, layout.grid_cols)


def read_dataset(path) -> tuple[DatasetInfo, np.ndarray, np.ndarray]:
    """Full load: (info, windows (N, 2K+2, H, W) uint8, labels (N, 4, H, W))."""
    info = read_header(path)
    H, W = info.height, info.width
    nb = _plane_bytes(H, W)
    n_win = info.window_channels
    rec_bytes = (n_win + 4) * nb
    windows = np.empty((info.record_count, n_win, H, W), dtype=np.uint8)
    labels = np.empty((info.record_count, 4, H, W), dtype=np.uint8)
    with open(path, "rb") as fh:
        fh.seek(_HEADER.size)
        payload = fh.read()
    if len(payload) != info.record_count * rec_bytes:
        raise NeodError(
            f"payload holds {len(payload)} bytes, expected {info.record_count * rec_bytes}"
        )
    pos = 0
    for i in range(info.record_count):
        for ch in range(n_win):
            windows[i, ch] = _unpack_plane(payload[pos:pos + nb], H, W)
            pos += nb
        for ch in range(4):
            labels[i, ch] = _unpack_plane(payload[pos:pos + nb], H, W)
            pos += nb
    return info, windows, labels

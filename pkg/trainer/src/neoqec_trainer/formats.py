"""Independent readers/writers for the exchange formats.

These deliberately do not import the inference package: the byte layouts are
the contract, and keeping a second implementation here cross-validates them.

NEOD (datasets): little-endian header "NEOD", version u16, d u16, K u8,
shape u8 (0 single, 1 merged), record_count u64, p_train f32, seed u64; per
record 2K+2 window planes then 4 label planes, each bit-packed MSB-first,
row-major, padded to a byte boundary.

NEOW (weights): "NEOW", version u16, kind u8 (0 fp32, 1 binary), K u8,
layer_count u16; per layer in_ch u16, out_ch u16, kh u8, kw u8 and the
payload: fp32 weights in (out, in, kh, kw) row-major plus out_ch biases, or
MSB-first bit-packed weights padded per output filter plus int32 thresholds.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

NEOD_MAGIC = b"NEOD"
NEOW_MAGIC = b"NEOW"
VERSION = 1

_NEOD_HEADER = struct.Struct("<4sHHBBQfQ")
_NEOW_HEADER = struct.Struct("<4sHBBH")
_NEOW_LAYER = struct.Struct("<HHBB")


class FormatError(ValueError):
    pass


@dataclass
class Dataset:
    d: int
    K: int
    shape_code: int
    p_train: float
    seed: int
    windows: np.ndarray  # uint8 (N, 2K+2, H, W)
    labels: np.ndarray  # uint8 (N, 4, H, W)


def _grid_size(d: int, shape_code: int) -> tuple[int, int]:
    side = 2 * d - 1
    return (side, side) if shape_code == 0 else (side, 2 * side + 1)


def read_neod(path) -> Dataset:
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < _NEOD_HEADER.size:
        raise FormatError("short NEOD header")
    magic, version, d, K, shape_code, count, p_train, seed = _NEOD_HEADER.unpack(
        blob[: _NEOD_HEADER.size]
    )
    if magic != NEOD_MAGIC:
        raise FormatError(f"bad magic {magic!r}")
    if version != VERSION:
        raise FormatError(f"unsupported NEOD version {version}")
    H, W = _grid_size(d, shape_code)
    nb = (H * W + 7) // 8
    n_win = 2 * K + 2
    rec = (n_win + 4) * nb
    payload = blob[_NEOD_HEADER.size:]
    if len(payload) != count * rec:
        raise FormatError(f"payload {len(payload)} bytes, expected {count * rec}")
    raw = np.frombuffer(payload, dtype=np.uint8).reshape(count, n_win + 4, nb)
    planes = np.unpackbits(raw, axis=2)[:, :, : H * W].reshape(count, n_win + 4, H, W)
    return Dataset(d, K, shape_code, p_train, seed,
                   planes[:, :n_win].copy(), planes[:, n_win:].copy())


@dataclass
class LayerParams:
    in_ch: int
    out_ch: int
    kh: int
    kw: int
    weights: np.ndarray  # float32 or uint8 (out, in, kh, kw)
    bias_or_threshold: np.ndarray  # float32 biases or int32 thresholds


def write_neow(path, kind: str, K: int, layers: list[LayerParams]) -> None:
    if kind not in ("fp32", "binary"):
        raise FormatError(f"unknown kind {kind!r}")
    blob = bytearray()
    blob += _NEOW_HEADER.pack(NEOW_MAGIC, VERSION, 0 if kind == "fp32" else 1, K, len(layers))
    for lp in layers:
        blob += _NEOW_LAYER.pack(lp.in_ch, lp.out_ch, lp.kh, lp.kw)
        if kind == "fp32":
            blob += np.ascontiguousarray(lp.weights, dtype="<f4").tobytes()
            blob += np.ascontiguousarray(lp.bias_or_threshold, dtype="<f4").tobytes()
        else:
            for oc in range(lp.out_ch):
                bits = np.ascontiguousarray(lp.weights[oc], dtype=np.uint8).reshape(-1)
                blob += np.packbits(bits).tobytes()
            blob += np.ascontiguousarray(lp.bias_or_threshold, dtype="<i4").tobytes()
    with open(path, "wb") as fh:
        fh.write(bytes(blob))


def read_neow(path) -> tuple[str, int, list[LayerParams]]:
    with open(path, "rb") as fh:
        blob = fh.read()
    pos = _NEOW_HEADER.size
    magic, version, kind_code, K, count = _NEOW_HEADER.unpack(blob[:pos])
    if magic != NEOW_MAGIC:
        raise FormatError(f"bad magic {magic!r}")
    if version != VERSION:
        raise FormatError(f"unsupported NEOW version {version}")
    kind = "fp32" if kind_code == 0 else "binary"
    layers = []
    for _ in range(count):
        in_ch, out_ch, kh, kw = _NEOW_LAYER.unpack(blob[pos:pos + _NEOW_LAYER.size])
        pos += _NEOW_LAYER.size
        per = in_ch * kh * kw
        if kind == "fp32":
            w = np.frombuffer(blob, dtype="<f4", count=out_ch * per, offset=pos)
            pos += 4 * out_ch * per
            b = np.frombuffer(blob, dtype="<f4", count=out_ch, offset=pos)
            pos += 4 * out_ch
            layers.append(LayerParams(in_ch, out_ch, kh, kw,
                                      w.reshape(out_ch, in_ch, kh, kw).copy(), b.copy()))
        else:
            nb = (per + 7) // 8
            w = np.empty((out_ch, in_ch, kh, kw), dtype=np.uint8)
            for oc in range(out_ch):
                packed = np.frombuffer(blob, dtype=np.uint8, count=nb, offset=pos)
                pos += nb
                w[oc] = np.unpackbits(packed)[:per].reshape(in_ch, kh, kw)
            th = np.frombuffer(blob, dtype="<i4", count=out_ch, offset=pos)
            pos += 4 * out_ch
            layers.append(LayerParams(in_ch, out_ch, kh, kw, w, th.copy()))
    if pos != len(blob):
        raise FormatError(f"{len(blob) - pos} trailing bytes")
    return kind, K, layers

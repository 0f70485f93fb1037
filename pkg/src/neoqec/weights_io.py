"""NEOW weight files: the bit-exact on-disk exchange format for nets.

Little-endian throughout.  Header: magic "NEOW" (4 bytes), version u16,
kind u8 (0 = fp32, 1 = binary), K u8, layer_count u16.  Per layer: in_ch u16,
out_ch u16, kh u8, kw u8, then the payload — fp32: out*in*kh*kw float32 in
(out, in, kh, kw) row-major order followed by out_ch float32 biases; binary:
the same weight order bit-packed MSB-first, padded to a byte boundary per
output-channel filter, followed by out_ch int32 thresholds.
"""

from __future__ import annotations

import struct

import numpy as np

from .nn import ACT_MAJORITY, ACT_RELU, ACT_SIGMOID, BINARY, FP32, ConvLayerSpec, ConvNet

MAGIC = b"NEOW"
VERSION = 1

_HEADER = struct.Struct("<4sHBBH")
_LAYER = struct.Struct("<HHBB")


class NeowError(ValueError):
    pass


class MagicError(NeowError):
    pass


class VersionError(NeowError):
    pass


class TruncationError(NeowError):
    pass


class ChannelMismatchError(NeowError):
    pass


def save_weights(net: ConvNet, path) -> None:
    if net.K is None:
        raise NeowError("only decoder nets with a declared K are serializable")
    net.validate_decoder()
    kind_code = 0 if net.kind == FP32 else 1
    blob = bytearray()
    blob += _HEADER.pack(MAGIC, VERSION, kind_code, net.K, len(net.layers))
    for i, (spec, w) in enumerate(zip(net.layers, net.weights)):
        blob += _LAYER.pack(spec.in_ch, spec.out_ch, spec.kh, spec.kw)
        if net.kind == FP32:
            blob += np.ascontiguousarray(w, dtype="<f4").tobytes()
            blob += np.ascontiguousarray(net.biases[i], dtype="<f4").tobytes()
        else:
            for oc in range(spec.out_ch):
                bits = np.ascontiguousarray(w[oc], dtype=np.uint8).reshape(-1)
                blob += np.packbits(bits).tobytes()
            blob += np.ascontiguousarray(net.thresholds[i], dtype="<i4").tobytes()
    with open(path, "wb") as fh:
        fh.write(bytes(blob))


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise TruncationError(
                f"file ends at byte {len(self.data)}, needed {self.pos + n}"
            )
        out = self.data[self.pos:self.pos + n]
        self.pos += n
        return out


def load_weights(path) -> ConvNet:
    with open(path, "rb") as fh:
        rd = _Reader(fh.read())
    magic, version, kind_code, K, layer_count = _HEADER.unpack(rd.take(_HEADER.size))
    if magic != MAGIC:
        raise MagicError(f"bad magic {magic!r}")
    if version != VERSION:
        raise VersionError(f"unsupported version {version}")
    if kind_code not in (0, 1):
        raise NeowError(f"unknown weight kind {kind_code}")
    kind = FP32 if kind_code == 0 else BINARY
    layers: list[ConvLayerSpec] = []
    weights: list[np.ndarray] = []
    biases: list[np.ndarray] = []
    thresholds: list[np.ndarray] = []
    prev_out = 2 * K + 2
    for li in range(layer_count):
        in_ch, out_ch, kh, kw = _LAYER.unpack(rd.take(_LAYER.size))
        if in_ch != prev_out:
            raise ChannelMismatchError(
                f"layer {li} expects {in_ch} input channels, previous stage emits {prev_out}"
            )
        prev_out = out_ch
        last = li == layer_count - 1
        if kind == FP32:
            act = ACT_SIGMOID if last else ACT_RELU
        else:
            act = ACT_MAJORITY
        layers.append(ConvLayerSpec(in_ch, out_ch, kh, kw, kind, act))
        per_filter = in_ch * kh * kw
        if kind == FP32:
            w = np.frombuffer(rd.take(4 * out_ch * per_filter), dtype="<f4")
            weights.append(w.reshape(out_ch, in_ch, kh, kw).copy())
            biases.append(np.frombuffer(rd.take(4 * out_ch), dtype="<f4").copy())
        else:
            nbytes = (per_filter + 7) // 8
            w = np.empty((out_ch, in_ch, kh, kw), dtype=np.uint8)
            for oc in range(out_ch):
                packed = np.frombuffer(rd.take(nbytes), dtype=np.uint8)
                w[oc] = np.unpackbits(packed)[:per_filter].reshape(in_ch, kh, kw)
            weights.append(w)
            thresholds.append(np.frombuffer(rd.take(4 * out_ch), dtype="<i4").copy())
    if prev_out != 4:
        raise ChannelMismatchError(f"decoder nets must emit 4 channels, got {prev_out}")
    if rd.pos != len(rd.data):
        raise TruncationError(f"{len(rd.data) - rd.pos} trailing bytes")
    net = ConvNet(layers, weights, biases, thresholds, K=K)
    net.validate_decoder()
    return net

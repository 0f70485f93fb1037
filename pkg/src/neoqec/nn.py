"""Fully-convolutional first-stage decoder: window building, FP32 and
XNOR-binarized inference, and output thresholding.

The input of an inference is a (2K+2)-channel stack over the patch grid:
channels 2i / 2i+1 hold the X- / Z-ancilla detection events of cycles
t .. t+K-1 (the target layer t lowest, layers past the end zero-filled), and
the last two channels carry the X/Z boundary masks.  The four output channels
are X errors on data, Z errors on data, and measurement flips on X/Z
ancillas, all at the target layer.

Both inference paths preserve spatial shape via zero padding.  The binary
path works over the {0,1} alphabet: an output bit fires when the number of
XNOR agreements across the full receptive field (padding contributes input
bit 0) reaches the per-channel integer threshold.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .lattice import CodeLayout, DetectionVolume

FP32 = "fp32"
BINARY = "binary"

ACT_RELU = "relu"
ACT_SIGMOID = "sigmoid"
ACT_MAJORITY = "majority"

OUT_CHANNELS = 4


@dataclass(frozen=True)
class ConvLayerSpec:
    in_ch: int
    out_ch: int
    kh: int
    kw: int
    kind: str
    activation: str

    def __post_init__(self):
        if self.kh % 2 == 0 or self.kw % 2 == 0:
            raise ValueError("kernel sides must be odd to preserve shape")
        if self.kind not in (FP32, BINARY):
            raise ValueError(f"unknown layer kind {self.kind!r}")

    @property
    def fanin(self) -> int:
        return self.in_ch * self.kh * self.kw


@dataclass
class ConvNet:
    """Layer specs plus parameters.

    weights: per layer float32 (out, in, kh, kw) for fp32 nets or uint8 {0,1}
    for binary nets.  fp32 layers carry float32 biases, binary layers carry
    int32 per-channel thresholds.  K is the input window depth; nets used as
    decoders must have 2K+2 input channels and 4 output channels.
    """

    layers: list[ConvLayerSpec]
    weights: list[np.ndarray]
    biases: list[np.ndarray] = field(default_factory=list)
    thresholds: list[np.ndarray] = field(default_factory=list)
    K: int | None = None

    def __post_init__(self):
        if not self.layers:
            raise ValueError("a net needs at least one layer")
        kinds = {ls.kind for ls in self.layers}
        if len(kinds) != 1:
            raise ValueError("mixed fp32/binary layers are not supported")
        for prev, cur in zip(self.layers, self.layers[1:]):
            if prev.out_ch != cur.in_ch:
                raise ValueError("layer channel chain mismatch")
        for ls, w in zip(self.layers, self.weights):
            if w.shape != (ls.out_ch, ls.in_ch, ls.kh, ls.kw):
                raise ValueError("weight tensor shape mismatch")
        if self.kind == FP32:
            if len(self.biases) != len(self.layers):
                raise ValueError("fp32 nets need one bias vector per layer")
        else:
            if len(self.thresholds) != len(self.layers):
                raise ValueError("binary nets need one threshold vector per layer")

    @property
    def kind(self) -> str:
        return self.layers[0].kind

    @property
    def in_channels(self) -> int:
        return self.layers[0].in_ch

    @property
    def out_channels(self) -> int:
        return self.layers[-1].out_ch

    def validate_decoder(self) -> None:
        if self.K is None:
            raise ValueError("decoder nets must declare their window depth K")
        if self.in_channels != 2 * self.K + 2:
            raise ValueError(
                f"first layer expects {self.in_channels} channels, "
                f"but K={self.K} windows have {2 * self.K + 2}"
            )
        if self.out_channels != OUT_CHANNELS:
            raise ValueError("decoder nets must emit 4 channels")


def base_model_specs(K: int = 4, kind: str = BINARY) -> list[ConvLayerSpec]:
    """The three-layer reference decoder: 7x7 then two 5x5 layers, 16 hidden
    channels, 2K+2 inputs and 4 outputs."""
    act_hidden = ACT_MAJORITY if kind == BINARY else ACT_RELU
    act_out = ACT_MAJORITY if kind == BINARY else ACT_SIGMOID
    return [
        ConvLayerSpec(2 * K + 2, 16, 7, 7, kind, act_hidden),
        ConvLayerSpec(16, 16, 5, 5, kind, act_hidden),
        ConvLayerSpec(16, OUT_CHANNELS, 5, 5, kind, act_out),
    ]


@dataclass
class InferredErrors:
    x_on_data: np.ndarray
    z_on_data: np.ndarray
    mflip_on_ancx: np.ndarray
    mflip_on_ancz: np.ndarray

    def any(self) -> bool:
        return bool(
            self.x_on_data.any()
            or self.z_on_data.any()
            or self.mflip_on_ancx.any()
            or self.mflip_on_ancz.any()
        )


def build_window(volume: DetectionVolume, layout: CodeLayout, t: int, K: int) -> np.ndarray:
    """(2K+2, H, W) uint8 stack for target layer t; layers beyond the final
    perfect round are zero-filled."""
    L = volume.layers
    if not 0 <= t < L:
        raise ValueError(f"target layer {t} outside volume of {L} layers")
    H, W = layout.grid_rows, layout.grid_cols
    win = np.zeros((2 * K + 2, H, W), dtype=np.uint8)
    for i in range(K):
        if t + i < L:
            layer = volume.ev[t + i]
            win[2 * i] = (layer & layout.ancx_mask).astype(np.uint8)
            win[2 * i + 1] = (layer & layout.ancz_mask).astype(np.uint8)
    win[2 * K] = layout.x_boundary_mask.astype(np.uint8)
    win[2 * K + 1] = layout.z_boundary_mask.astype(np.uint8)
    return win


def _conv2d_f64(x: np.ndarray, w: np.ndarray, bias: np.ndarray) -> np.ndarray:
    cout, cin, kh, kw = w.shape
    _, H, W = x.shape
    ph, pw = kh // 2, kw // 2
    xp = np.zeros((cin, H + 2 * ph, W + 2 * pw), dtype=np.float64)
    xp[:, ph:ph + H, pw:pw + W] = x
    cols = np.empty((H * W, cin * kh * kw), dtype=np.float64)
    idx = 0
    for ic in range(cin):
        for dr in range(kh):
            for dc in range(kw):
                cols[:, idx] = xp[ic, dr:dr + H, dc:dc + W].reshape(-1)
                idx += 1
    out = cols @ w.reshape(cout, -1).astype(np.float64).T + bias.astype(np.float64)
    return out.T.reshape(cout, H, W)


def conv_forward_fp32(net: ConvNet, window: np.ndarray) -> np.ndarray:
    """Probability grids (4, H, W): hidden rectifier, sigmoid output."""
    if net.kind != FP32:
        raise ValueError("fp32 forward pass needs an fp32 net")
    if window.shape[0] != net.in_channels:
        raise ValueError("window channel count mismatch")
    a = window.astype(np.float64)
    for i, (spec, w, b) in enumerate(zip(net.layers, net.weights, net.biases)):
        a = _conv2d_f64(a, w, b)
        if i < len(net.layers) - 1:
            np.maximum(a, 0.0, out=a)
        else:
            a = 1.0 / (1.0 + np.exp(-a))
    return a


def conv_forward_binary(net: ConvNet, window: np.ndarray) -> np.ndarray:
    """Bit grids (4, H, W) uint8 via XNOR/popcount majority layers."""
    if net.kind != BINARY:
        raise ValueError("binary forward pass needs a binary net")
    if window.shape[0] != net.in_channels:
        raise ValueError("window channel count mismatch")
    if not net.thresholds:
        raise ValueError("binary nets need thresholds")
    a = window.astype(np.uint8)
    for w, th in zip(net.weights, net.thresholds):
        a = kernels.binary_conv_layer(a, w, th)
    return a


def threshold_outputs(output: np.ndarray, layout: CodeLayout) -> InferredErrors:
    """Strictly-above-half thresholding (fp32) or direct bits (binary), masked
    to the cells each channel speaks about."""
    if output.shape[0] != OUT_CHANNELS:
        raise ValueError("expected 4 output channels")
    if output.dtype.kind == "f":
        bits = output > 0.5
    else:
        bits = output.astype(bool)
    return InferredErrors(
        x_on_data=bits[0] & layout.data_mask,
        z_on_data=bits[1] & layout.data_mask,
        mflip_on_ancx=bits[2] & layout.ancx_mask,
        mflip_on_ancz=bits[3] & layout.ancz_mask,
    )


def count_parameters(net: ConvNet) -> int:
    return int(sum(w.size for w in net.weights))

"""Behavioral model and cost/power calculators for the SFQ XNOR processing
unit: a bit-serial XNOR arithmetic unit feeding a k-bit binary counter.

Cell data and the 9-bit design totals come from the RSFQ cell library the
unit was laid out in; the design totals include interconnect junctions that
the per-cell table cannot reproduce, so totals for other k are multiset
estimates and flagged as such.  Power follows the two SFQ conventions:
static-dominated RSFQ power is bias voltage times bias current, and ERSFQ
power is bias current x frequency x Phi0 x 2.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .nn import ConvNet

#: single flux quantum, in weber (value used throughout the power arithmetic)
PHI0_WB = 2.068e-15

#: supply voltage of the target cell library at 4 K
SUPPLY_V = 2.5e-3


@dataclass(frozen=True)
class CellSpec:
    name: str
    jj_count: int
    bias_ma: float
    area_um2: float
    latency_ps: float


CELL_LIBRARY = {
    "DFF": CellSpec("DFF", 6, 0.720, 900.0, 5.1),
    "TFF": CellSpec("TFF", 13, 0.808, 3600.0, 7.3),
    "XOR": CellSpec("XOR", 11, 1.068, 3600.0, 6.5),
    "NOT": CellSpec("NOT", 11, 0.848, 3600.0, 6.5),
}

# measured totals of the k=9 design (with interconnect), per submodule
_K9_COUNTER = (123, 7.99, 6.5)  # JJs, bias mA, latency ps
_K9_XNOR = (28, 3.23, 7.3)
_K9_TOTAL = (151, 11.2, 13.8)


@dataclass
class NpuReport:
    k: int
    cell_counts: dict[str, int]
    jj_total: int
    bias_total_ma: float
    latency_ps: float
    fmax_ghz: float
    estimate: bool
    counter_subtotal: tuple[int, float, float] = field(default=None)
    xnor_subtotal: tuple[int, float, float] = field(default=None)

    @property
    def fmax_class(self) -> str:
        return f"~{round(self.fmax_ghz / 10) * 10} GHz class"


def npu_cost(k: int) -> NpuReport:
    """Hardware cost of a k-bit-counter unit; k=9 reports the measured design
    totals, other k are cell-table sums flagged as estimates."""
    if k < 1:
        raise ValueError("counter needs at least one bit")
    cells = {"TFF": k, "DFF": 1, "XOR": 1, "NOT": 1}
    if k == 9:
        jj, bias, lat = _K9_TOTAL
        return NpuReport(
            k, cells, jj, bias, lat, 1000.0 / lat, estimate=False,
            counter_subtotal=_K9_COUNTER, xnor_subtotal=_K9_XNOR,
        )
    jj = sum(CELL_LIBRARY[n].jj_count * c for n, c in cells.items())
    bias = sum(CELL_LIBRARY[n].bias_ma * c for n, c in cells.items())
    lat = CELL_LIBRARY["TFF"].latency_ps + CELL_LIBRARY["XOR"].latency_ps
    return NpuReport(k, cells, jj, round(bias, 3), lat, 1000.0 / lat, estimate=True)


def npu_simulate(
    weight_bits: np.ndarray, input_bits: np.ndarray, threshold: int, k: int
) -> tuple[int, int]:
    """Bit-serial activation: streams of length N, counter preloaded to
    2^(k-1) - threshold (mod 2^k); the XNOR of each (weight, input) pair
    reaches the counter one cycle late, the readout DFF latches the counter's
    top-bit carry pulse, and the activation is 1 iff the agreement count
    reached the threshold.  Returns (activation, cycles) with cycles = N + 2.
    """
    wb = np.ascontiguousarray(weight_bits, dtype=np.uint8)
    xb = np.ascontiguousarray(input_bits, dtype=np.uint8)
    if wb.shape != xb.shape or wb.ndim != 1:
        raise ValueError("weight and input streams must be equal-length vectors")
    N = len(wb)
    if not 0 <= threshold <= N:
        raise ValueError(f"threshold must lie in [0, {N}]")
    if (1 << k) <= N:
        raise ValueError("counter too small: 2^k must exceed the stream length")
    return kernels.npu_sim(wb, xb, int(threshold), int(k))


def rsfq_power(bias_v: float, bias_a: float) -> float:
    """Static-dominated RSFQ power: bias voltage times bias current, watts."""
    if bias_v < 0 or bias_a < 0:
        raise ValueError("bias values must be non-negative")
    return bias_v * bias_a


def ersfq_power(bias_a: float, freq_hz: float) -> float:
    """ERSFQ dynamic power: bias current x frequency x Phi0 x 2, watts."""
    if bias_a < 0 or freq_hz < 0:
        raise ValueError("bias and frequency must be non-negative")
    return bias_a * freq_hz * PHI0_WB * 2.0


def count_mults(net: ConvNet | None, d: int) -> dict:
    """Multiplications per inference on a distance-d patch: per layer
    k^2 * in_ch * out_ch * (2d-1)^2.  None counts as an empty net."""
    side = 2 * d - 1
    layers = net.layers if net is not None else []
    per_layer = [ls.kh * ls.kw * ls.in_ch * ls.out_ch * side * side for ls in layers]
    coeffs = [ls.kh * ls.kw * ls.in_ch * ls.out_ch for ls in layers]
    return {
        "per_layer": per_layer,
        "coefficients": coeffs,
        "total": sum(per_layer),
        "total_coefficient": sum(coeffs),
    }


@dataclass
class PowerReport:
    d: int
    f_npu_ghz: float
    p_npu_uw: float
    p_nn_uw: float
    p_stage2_uw: float
    p_total_uw: float
    budget_w: float
    capacity: int

    def to_text(self) -> str:
        lines = [
            f"d = {self.d}",
            f"f_npu_ghz = {self.f_npu_ghz:g}",
            f"p_npu_uw = {self.p_npu_uw:.6f}",
            f"p_nn_uw = {self.p_nn_uw:.4f}",
            f"p_stage2_uw = {self.p_stage2_uw:.4f}",
            f"p_total_uw = {self.p_total_uw:.4f}",
            f"budget_w = {self.budget_w:g}",
            f"capacity = {self.capacity}",
        ]
        return "\n".join(lines) + "\n"

    def to_csv(self) -> str:
        head = "p_npu_uw,p_nn_uw,p_total_uw,capacity"
        row = f"{self.p_npu_uw:.6f},{self.p_nn_uw:.4f},{self.p_total_uw:.4f},{self.capacity}"
        return head + "\n" + row + "\n"


def decoder_power_report(
    d: int,
    f_npu_ghz: float = 16.0,
    p_stage2_uw: float = 400.3,
    budget_w: float = 1.0,
    bias_ma: float = 11.2,
) -> PowerReport:
    """One ERSFQ NPU per grid cell: P_NN = P_NPU * (2d-1)^2, plus the fixed
    second-stage budget; capacity is how many logical qubits fit the budget."""
    if d < 3 or d % 2 == 0:
        raise ValueError("d must be odd and >= 3")
    p_npu = ersfq_power(bias_ma * 1e-3, f_npu_ghz * 1e9)
    p_nn = p_npu * (2 * d - 1) ** 2
    p_total = p_nn + p_stage2_uw * 1e-6
    capacity = int(budget_w // p_total) if p_total > 0 else 0
    return PowerReport(
        d=d,
        f_npu_ghz=f_npu_ghz,
        p_npu_uw=p_npu * 1e6,
        p_nn_uw=p_nn * 1e6,
        p_stage2_uw=p_stage2_uw,
        p_total_uw=p_total * 1e6,
        budget_w=budget_w,
        capacity=capacity,
    )


def throughput_check(
    net: ConvNet | None, d: int, f_npu_ghz: float, budget_us: float = 1.0
) -> dict:
    """One NPU per cell must finish the net's multiplications within the code
    cycle; at one XNOR per clock that means mults_per_npu <= f * budget."""
    side = 2 * d - 1
    total = count_mults(net, d)["total"]
    per_npu = total // (side * side)
    available = f_npu_ghz * 1e3 * budget_us  # clock cycles per budget window
    return {
        "mults_required": per_npu,
        "npu_count": side * side,
        "cycles_available": available,
        "feasible": per_npu <= available,
    }

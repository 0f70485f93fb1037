"""Hot-loop kernels with a compiled core and a pure-Python fallback.

The compiled extension (`neoqec.kernels._accel`, Cython) is selected at import
time when available; set NEOQEC_PURE=1 to force the numpy/Python fallback.
Both backends implement identical contracts and are parity-tested bit-for-bit.
"""

import os

from . import pure

if os.environ.get("NEOQEC_PURE"):
    _impl = pure
    BACKEND = "pure"
else:
    try:
        from . import _accel as _impl  # type: ignore[attr-defined]

        BACKEND = "accel"
    except ImportError:
        _impl = pure
        BACKEND = "pure"

binary_conv_layer = _impl.binary_conv_layer
mwpm_solve = _impl.mwpm_solve
greedy_pass = _impl.greedy_pass
npu_sim = _impl.npu_sim

__all__ = ["BACKEND", "binary_conv_layer", "mwpm_solve", "greedy_pass", "npu_sim", "pure"]

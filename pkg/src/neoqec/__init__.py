"""neoqec: a desk-scale surface-code and lattice-surgery decoding lab.

Simulates phenomenological noise on planar patches and merge-and-split
operations, decodes online with a sliding-window convolutional first stage
(FP32 or XNOR-binarized) feeding a greedy buffered second stage, provides an
exact small-instance matching reference, and models the cost, timing, and
power of an SFQ XNOR processing unit.
"""

from .kernels import BACKEND

__version__ = "0.1.0"

__all__ = ["BACKEND", "__version__"]

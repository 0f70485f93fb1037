"""Training side of the two-stage decoder: consumes NEOD datasets, trains the
FP32 net and its XNOR-binarized counterpart, and exports NEOW weight files
for the inference engine."""

__version__ = "0.1.0"

"""Photonic-reservoir simulator with greedy Boolean readout learning."""

from ._kernels import backend_name

__version__ = "0.1.0"
__all__ = ["backend_name", "__version__"]

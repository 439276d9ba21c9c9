"""Brownian loop measure, Selberg zeta and heat traces on hyperbolic surfaces."""
from importlib.metadata import PackageNotFoundError, version

try:
    __version__ = version("artifact")
except PackageNotFoundError:
    __version__ = "0.1.0"

"""Numerical bifurcation laboratory for a predator-prey model with an
additive Allee effect and a generalized Holling IV functional response."""

__version__ = "0.1.0"

from .model import Params, State  # noqa: F401

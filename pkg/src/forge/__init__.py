"""Computational toolkit for fixed points and hyperbolic elements of groups
acting on rank-2 spherical buildings and the discrete affine building of SL3."""

__version__ = "0.1.0"

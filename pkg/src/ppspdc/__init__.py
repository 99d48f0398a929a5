"""Entangled photon pairs from periodically and chirp-poled nonlinear crystals."""

__version__ = "0.1.0"

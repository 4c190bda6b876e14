"""Simulation and decoding toolkit for quantum memories built from Ising anyons.

The package provides a Majorana stabilizer simulation of Ising anyon systems
on sphere-like and torus lattices, thermal and phenomenological noise
channels, topological decoders (clustering and matching based), and a Monte
Carlo harness for threshold and memory-lifetime estimation.
"""

from .model import ISING, AnyonModel, Charge, FusionError, IsingAnyonModel

__all__ = [
    "ISING",
    "AnyonModel",
    "Charge",
    "FusionError",
    "IsingAnyonModel",
]

__version__ = "0.1.0"

"""Desk-scale numerical laboratory for scale-calculus Fredholm analysis and
numerical gluing of broken Hamiltonian Floer trajectories on the cylinder."""

__version__ = "0.1.0"

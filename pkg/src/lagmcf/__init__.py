"""Explicit mean curvature flows of spherical slices inside rotationally
symmetric Lagrangian submanifolds of C^n, with a finite-difference oracle."""

__version__ = "0.1.0"

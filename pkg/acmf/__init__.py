"""Phase-field mean curvature flow with obstacles on the flat torus."""

__version__ = "0.1.0"

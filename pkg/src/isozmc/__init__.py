"""Zero mean curvature surfaces with planar curvature lines in isotropic 3-space."""

__version__ = "0.1.0"

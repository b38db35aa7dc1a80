"""Vision-based heading control for MAVs in dark tunnels, with a procedural
tunnel simulator for closed-loop evaluation."""

from .labels import ClassLabel

__version__ = "0.1.0"

__all__ = ["ClassLabel", "__version__"]

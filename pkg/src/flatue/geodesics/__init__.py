"""Saddle connections, cylinders, systoles and the thick-thin decomposition."""

from .saddle import (Box, Cylinder, Disk, SaddleConnection, detect_cylinders,
                     enumerate_saddle_connections, shortest_saddle_connection)
from .tighten import tighten_curve
from .systole import SystoleEstimate, systole_both, systole_estimate
from .decomposition import Decomposition, thick_thin_decomposition
from .criterion import (CriterionReport, Theorem3Report, criterion_integral, delta_envelope,
                        theorem3_report)

__all__ = [
    "Box", "Cylinder", "Disk", "SaddleConnection", "detect_cylinders", "enumerate_saddle_connections",
    "shortest_saddle_connection", "tighten_curve", "SystoleEstimate", "systole_both", "systole_estimate",
    "Decomposition", "thick_thin_decomposition", "CriterionReport", "Theorem3Report",
    "criterion_integral", "delta_envelope", "theorem3_report",
]

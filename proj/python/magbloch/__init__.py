"""Magnetic Bloch band geometry, semiclassical flow and thermodynamics.

Bands are 0-based here; the command-line tool numbers them from 1.
"""

from ._magbloch import (
    BandPoint,
    ChernResult,
    ConfigError,
    DegeneracyError,
    Error,
    NumericError,
    band_point,
    berry_curvature,
    bloch_matrix,
    chern_number,
    density,
    equilibrium_compare,
    hall_current,
    hsc_defect_order1,
    magnetic_moment,
    magnetization,
    pressure,
    trajectory,
)

__all__ = [
    "BandPoint",
    "ChernResult",
    "ConfigError",
    "DegeneracyError",
    "Error",
    "NumericError",
    "band_point",
    "berry_curvature",
    "bloch_matrix",
    "chern_number",
    "density",
    "equilibrium_compare",
    "hall_current",
    "hsc_defect_order1",
    "magnetic_moment",
    "magnetization",
    "pressure",
    "trajectory",
]

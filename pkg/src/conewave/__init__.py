"""Continuous shearlet tight frames from compactly supported spline generators."""

__version__ = "0.1.0"

from .cones import BumpDescriptor, ConeProjectionSet, compute_cone_projection, default_bump, make_bump
from .generators import (AdmissibilityConstant, ShearletGenerator, compute_admissibility_constant,
                         make_spline_shearlet, preset, transpose_generator)
from .grids import (FrequencyGrid, SampledSpectrum, ScaleShearScheme, SpatialField, build_frequency_grid,
                    build_scale_shear_scheme, forward_spectrum, inverse_field, reference_scheme)
from .transform import analyze, full_group_isometry_check, parseval_report, synthesize
from .windows import FrameSpectrum, build_windows, compute_delta, frame_spectrum

__all__ = [
    "AdmissibilityConstant", "BumpDescriptor", "ConeProjectionSet", "FrameSpectrum", "FrequencyGrid",
    "SampledSpectrum", "ScaleShearScheme", "ShearletGenerator", "SpatialField", "analyze",
    "build_frequency_grid", "build_scale_shear_scheme", "build_windows", "compute_admissibility_constant",
    "compute_cone_projection", "compute_delta", "default_bump", "forward_spectrum", "frame_spectrum",
    "full_group_isometry_check", "inverse_field", "make_bump", "make_spline_shearlet", "parseval_report",
    "preset", "reference_scheme", "synthesize", "transpose_generator",
]

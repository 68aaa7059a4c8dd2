"""Recover intensity-dependent ionization probabilities from focal-volume
averaged ion-yield curves, in 1D/2D/3D detection geometries.

The averaged signal and the probability share one power-series basis in
which spatial averaging is diagonal: each signal coefficient is the
probability coefficient times a geometry moment G_k.  Inversion is then a
series fit followed by a per-index division.
"""

from .curves import ProbabilityCurve, SignalCurve
from .errors import (
    AccuracyError,
    CurveParseError,
    CurveValidationError,
    DomainError,
    MPEError,
    RestrictionError,
    SingularKernelError,
    UnderdeterminedError,
)
from .forward import average_quadrature, average_series
from .geometry import (
    BeamParameters,
    GEOMETRY_1D,
    GEOMETRY_2D,
    GEOMETRY_3D,
    Geometry,
    VolumetricCoefficients,
    as_geometry,
    build_coefficients,
    coefficient_closed,
    coefficient_oracle,
    isointensity_volume,
    kernel,
    shell_radius,
)
from .inversion import (
    ISSInverter,
    MPEInverter,
    fit_series,
    iss_invert,
    mpe_invert,
    resample_spline,
)
from .io import (
    read_curve,
    write_curve,
    write_series_coefficients,
    write_volumetric_coefficients,
)
from .models import (
    AdkSpecies,
    DEFAULT_MODEL,
    ModelParams,
    PulseParams,
    XENON_ION,
    XENON_NEUTRAL,
    adk_rate,
    model_mpe_series,
    model_probability,
    model_yield,
    pulse_probabilities,
)
from .series import PowerSeries, evaluate_series

__version__ = "0.1.0"

__all__ = [
    "AccuracyError",
    "AdkSpecies",
    "BeamParameters",
    "CurveParseError",
    "CurveValidationError",
    "DEFAULT_MODEL",
    "DomainError",
    "GEOMETRY_1D",
    "GEOMETRY_2D",
    "GEOMETRY_3D",
    "Geometry",
    "ISSInverter",
    "MPEError",
    "MPEInverter",
    "ModelParams",
    "PowerSeries",
    "ProbabilityCurve",
    "PulseParams",
    "RestrictionError",
    "SignalCurve",
    "SingularKernelError",
    "UnderdeterminedError",
    "VolumetricCoefficients",
    "XENON_ION",
    "XENON_NEUTRAL",
    "adk_rate",
    "as_geometry",
    "average_quadrature",
    "average_series",
    "build_coefficients",
    "coefficient_closed",
    "coefficient_oracle",
    "evaluate_series",
    "fit_series",
    "isointensity_volume",
    "iss_invert",
    "kernel",
    "model_mpe_series",
    "model_probability",
    "model_yield",
    "mpe_invert",
    "pulse_probabilities",
    "read_curve",
    "resample_spline",
    "shell_radius",
    "write_curve",
    "write_series_coefficients",
    "write_volumetric_coefficients",
]

"""Sampled-curve containers: averaged signals and recovered probabilities."""

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from ._validation import as_float_array, check_intensity_grid

__all__ = ["SignalCurve", "ProbabilityCurve"]


@dataclass(frozen=True)
class SignalCurve:
    """Spatially averaged yield S(I0) on a strictly increasing grid.

    Signals are in arbitrary units and may be negative (synthetic or
    reconstructed curves); physical yields are nonnegative.
    """

    intensities: np.ndarray
    values: np.ndarray
    label: str = "signal"

    def __post_init__(self):
        I = check_intensity_grid(self.intensities, "intensities", allow_empty=True)
        S = as_float_array(self.values, "values")
        if I.shape != S.shape:
            raise DomainError("intensities and values must have equal length")
        I.setflags(write=False)
        S.setflags(write=False)
        object.__setattr__(self, "intensities", I)
        object.__setattr__(self, "values", S)

    def __len__(self):
        return self.intensities.size

    def scaled(self, intensity_factor=1.0, signal_factor=1.0):
        return SignalCurve(
            self.intensities * intensity_factor, self.values * signal_factor, self.label
        )


@dataclass(frozen=True)
class ProbabilityCurve:
    """Recovered probability samples plus the series that generated them.

    The ``values`` are exactly the series evaluated on ``intensities``.
    ``diagnostics`` carries the fit report (residuals, conditioning,
    excluded indices, oscillation indicators).
    """

    intensities: np.ndarray
    values: np.ndarray
    series: object
    diagnostics: dict = field(default_factory=dict)
    label: str = "probability"

    def __post_init__(self):
        I = check_intensity_grid(self.intensities, "intensities", allow_empty=True)
        P = as_float_array(self.values, "values")
        if I.shape != P.shape:
            raise DomainError("intensities and values must have equal length")
        I.setflags(write=False)
        P.setflags(write=False)
        object.__setattr__(self, "intensities", I)
        object.__setattr__(self, "values", P)

    def __len__(self):
        return self.intensities.size

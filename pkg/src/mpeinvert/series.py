"""Power-series representation of signals and probabilities.

A series with offset m, coefficients c_k and reference intensity I_ref
evaluates to

    f(I) = x**(m-1) * sum_k c_k * x**k,   x = I/I_ref.

The same container holds averaged-signal coefficients A_k and probability
coefficients B_k; the two are linked per index by A_k = G_k * B_k.
"""

from dataclasses import dataclass, field
from math import fsum

import numpy as np

from .errors import DomainError
from ._validation import check_positive_scalar

__all__ = ["PowerSeries", "evaluate_series"]


@dataclass(frozen=True)
class PowerSeries:
    m: int
    coefficients: tuple
    reference_intensity: float
    excluded: tuple = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "coefficients", tuple(float(c) for c in self.coefficients))
        object.__setattr__(self, "excluded", tuple(int(k) for k in self.excluded))
        check_positive_scalar(self.reference_intensity, "reference_intensity")
        if len(self.coefficients) == 0:
            raise DomainError("a PowerSeries needs at least one coefficient")

    @property
    def k_max(self):
        return len(self.coefficients) - 1

    def __call__(self, I):
        return evaluate_series(self, I)

    def scaled(self, factor):
        """Series with every coefficient multiplied by ``factor``."""
        return PowerSeries(
            m=self.m,
            coefficients=tuple(factor * c for c in self.coefficients),
            reference_intensity=self.reference_intensity,
            excluded=self.excluded,
        )


def evaluate_series(series, I):
    """Evaluate a PowerSeries at intensity I (scalar or array).

    Terms are accumulated with exactly rounded summation after sorting by
    magnitude, so strongly cancelling coefficient sets lose no more than
    the rounding of the individual terms.
    """
    arr = np.asarray(I, dtype=float)
    if np.any(~np.isfinite(arr)) or np.any(arr <= 0):
        raise DomainError("intensity must be positive and finite")
    scalar = arr.ndim == 0
    xs = np.atleast_1d(arr) / series.reference_intensity
    coeffs = series.coefficients
    out = np.empty(xs.shape, dtype=float)
    for i, x in enumerate(xs):
        terms = sorted((c * x**k for k, c in enumerate(coeffs) if c != 0.0), key=abs)
        out[i] = fsum(terms) * x ** (series.m - 1)
    return float(out[0]) if scalar else out

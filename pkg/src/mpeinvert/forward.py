"""Forward spatial-averaging operator.

Maps an intensity-dependent probability to the signal a detector with a
given geometry would record, either exactly on series coefficients
(A_k = G_k * B_k) or by singular-aware quadrature of

    S(I0) = integral_0^1 K(xi) * P(xi*I0) dxi.
"""

import numpy as np
from scipy.integrate import quad

from .curves import SignalCurve
from .errors import AccuracyError
from .geometry import as_geometry, build_coefficients, kernel
from .series import PowerSeries, evaluate_series
from ._validation import check_intensity_grid

__all__ = ["average_series", "average_quadrature", "evaluate_series"]


def average_series(prob_series, geometry, mode="strict"):
    """Averaged-signal series from a probability series: A_k = G_k * B_k.

    Exact up to floating-point rounding; m and the reference intensity are
    preserved.  Raises RestrictionError if any nonzero coefficient sits on
    an inadmissible index for the geometry/mode.
    """
    geometry = as_geometry(geometry)
    table = build_coefficients(geometry, prob_series.m, prob_series.k_max, mode=mode)
    coeffs = []
    for k, b in enumerate(prob_series.coefficients):
        if k in table.excluded:
            if b != 0.0:
                table.value(k)  # raises RestrictionError naming the index
            coeffs.append(0.0)
        else:
            coeffs.append(table.value(k) * b)
    return PowerSeries(
        m=prob_series.m,
        coefficients=tuple(coeffs),
        reference_intensity=prob_series.reference_intensity,
        excluded=table.excluded,
    )


def _point_quadrature(prob, geometry, I0, rel_tol):
    """Integrate K(xi)*prob(xi*I0) over xi in (0, 1) for one peak intensity."""
    dim = geometry.dimension
    if dim == 1:
        # u = -ln(xi): S = (1/2) * int_0^inf u^(-1/2) * prob(I0*exp(-u)) du,
        # then u = v^2 to remove the endpoint singularity:
        # S = int_0^inf prob(I0*exp(-v^2)) dv
        def f(v):
            return prob(I0 * np.exp(-v * v))

        return quad(f, 0.0, np.inf, epsabs=0.0, epsrel=rel_tol * 0.1, limit=300)

    def f(xi):
        p = prob(xi * I0)
        if p == 0.0:
            return 0.0  # underflow guard: skip the kernel's xi -> 0 growth
        return kernel(geometry, xi) * p

    return quad(f, 0.0, 1.0, epsabs=0.0, epsrel=rel_tol * 0.1, limit=300)


def average_quadrature(prob, geometry, grid, rel_tol=1e-8, label="signal"):
    """Spatially averaged signal of an arbitrary probability function.

    ``prob`` must be evaluable on (0, max(grid)] and decay fast enough at
    I -> 0 for the geometry (O(I^(2+eps)) in 3D).  Each grid point is
    integrated adaptively; if any point misses ``rel_tol`` an AccuracyError
    is raised carrying the partial curve and the failed indices.
    """
    geometry = as_geometry(geometry)
    grid = check_intensity_grid(grid, "grid")
    values = np.empty(grid.shape)
    failed = []
    worst = 0.0
    for i, I0 in enumerate(grid):
        val, err = _point_quadrature(prob, geometry, float(I0), rel_tol)
        values[i] = val
        if val == 0.0:
            if err > rel_tol:
                failed.append(i)
        elif err > rel_tol * abs(val):
            failed.append(i)
            worst = max(worst, err / abs(val))
    curve = SignalCurve(grid, values, label=label)
    if failed:
        raise AccuracyError(
            f"quadrature missed rel_tol={rel_tol:g} at {len(failed)} grid point(s)",
            achieved=worst,
            partial=curve,
            failed_indices=failed,
        )
    return curve

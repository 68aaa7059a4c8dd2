"""Detection-geometry mathematics for focal-volume averaging.

Isointensity shell volumes, intensity-scaled volumetric weighting factors,
Gaussian-beam shell radii, and the volumetric moments G_k that connect the
averaged-signal series to the probability series.

All volumes and weighting factors are scale-free: they depend on the local
and peak intensities only through the ratio xi = I/I0.  The weighting
factors implemented here are the exact derivatives K = I0*|dV/dI| of the
volume expressions, so finite-differencing ``isointensity_volume`` recovers
``kernel`` to rounding error in every geometry.
"""

from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.special import betaln

from .errors import AccuracyError, DomainError, RestrictionError, SingularKernelError
from ._validation import check_positive_scalar, check_xi

__all__ = [
    "Geometry",
    "GEOMETRY_1D",
    "GEOMETRY_2D",
    "GEOMETRY_3D",
    "BeamParameters",
    "VolumetricCoefficients",
    "as_geometry",
    "isointensity_volume",
    "kernel",
    "shell_radius",
    "coefficient_closed",
    "coefficient_oracle",
    "build_coefficients",
]


@dataclass(frozen=True)
class Geometry:
    """Detection geometry: how much of the focal volume the detector sees.

    dimension 3 is full view (entire focus), 2 a thin transverse slice,
    1 a line volume along the propagation axis.
    """

    dimension: int

    def __post_init__(self):
        if self.dimension not in (1, 2, 3):
            raise DomainError(f"dimension must be 1, 2 or 3, got {self.dimension}")

    @property
    def label(self):
        return f"{self.dimension}D"

    @property
    def min_m(self):
        """Smallest admissible series offset m; None means unrestricted."""
        return {1: 1, 2: None, 3: 3}[self.dimension]

    @property
    def min_power(self):
        """Smallest p = m + k for which the defining integral converges."""
        return 3 if self.dimension == 3 else 2


GEOMETRY_1D = Geometry(1)
GEOMETRY_2D = Geometry(2)
GEOMETRY_3D = Geometry(3)

_BY_LABEL = {"1d": GEOMETRY_1D, "2d": GEOMETRY_2D, "3d": GEOMETRY_3D}


def as_geometry(geometry):
    """Coerce a Geometry, dimension int, or label like '2d' to Geometry."""
    if isinstance(geometry, Geometry):
        return geometry
    if isinstance(geometry, int):
        return Geometry(geometry)
    if isinstance(geometry, str):
        key = geometry.strip().lower()
        if key in _BY_LABEL:
            return _BY_LABEL[key]
    raise DomainError(f"cannot interpret {geometry!r} as a detection geometry")


@dataclass(frozen=True)
class BeamParameters:
    """Gaussian (TEM00) beam parameters, SI lengths."""

    waist_w0: float
    rayleigh_range_zR: float

    def __post_init__(self):
        check_positive_scalar(self.waist_w0, "waist_w0")
        check_positive_scalar(self.rayleigh_range_zR, "rayleigh_range_zR")

    def beam_size(self, z):
        """w(z) = w0*sqrt(1 + (z/zR)^2)."""
        return self.waist_w0 * np.sqrt(1.0 + (np.asarray(z, dtype=float) / self.rayleigh_range_zR) ** 2)


def isointensity_volume(geometry, xi):
    """Scale-free volume enclosed by the isointensity shell at xi = I/I0.

    Accepts a scalar or array xi in (0, 1]; V(1) = 0 in every geometry and
    V is monotonically decreasing in xi.
    """
    geometry = as_geometry(geometry)
    arr = check_xi(xi)
    u = 1.0 / arr
    if geometry.dimension == 3:
        s = np.sqrt(u - 1.0)
        out = s + s**3 / 6.0 - np.arctan(s)
    elif geometry.dimension == 2:
        out = np.log(u)
    else:
        out = np.sqrt(np.log(u))
    return out if isinstance(xi, np.ndarray) else float(out)


def kernel(geometry, xi):
    """Intensity-scaled volumetric weighting factor K(xi) = I0*|dV/dI|.

    Exact derivative of ``isointensity_volume``:

        K_3D(xi) = u*(u + 2)*sqrt(u - 1)/4,   u = 1/xi
        K_2D(xi) = u
        K_1D(xi) = u/(2*sqrt(ln u))

    K_3D(1) = 0 and K_2D(1) = 1.  K_1D diverges (integrably) at xi = 1;
    evaluating there raises SingularKernelError.
    """
    geometry = as_geometry(geometry)
    arr = check_xi(xi)
    u = 1.0 / arr
    if geometry.dimension == 3:
        out = 0.25 * u * (u + 2.0) * np.sqrt(u - 1.0)
    elif geometry.dimension == 2:
        out = u
    else:
        if np.any(arr == 1.0):
            raise SingularKernelError(
                "the 1D weighting factor diverges at xi = 1 (integrable singularity)"
            )
        out = 0.5 * u / np.sqrt(np.log(u))
    return out if isinstance(xi, np.ndarray) else float(out)


def shell_radius(z, I, I0, beam):
    """Radius of the isointensity shell at axial position z, or None.

    Solves I0*w0^2/(I*w(z)^2) for the shell radius of a Gaussian beam;
    returns None when the shell does not reach that z (log argument < 1)
    and 0.0 exactly on the boundary.
    """
    I = check_positive_scalar(I, "I")
    I0 = check_positive_scalar(I0, "I0")
    w = float(beam.beam_size(z))
    arg = I0 * beam.waist_w0**2 / (I * w**2)
    if arg < 1.0:
        return None
    return w * np.sqrt(np.log(arg) / 2.0)


def _admissible(geometry, m, k, mode):
    """Return (admissible, reason). Pole/undefined indices are never admissible."""
    p = m + k
    if mode == "strict":
        return (p >= geometry.min_power, f"p = m + k = {p} < {geometry.min_power}")
    # continuation mode: closed forms continued for 2D/1D; 3D stays strict
    if geometry.dimension == 3:
        return (p >= 3, f"p = m + k = {p} < 3")
    if geometry.dimension == 2:
        return (p != 1, "p = m + k = 1 is a pole of the closed form")
    # 1D: sqrt(1/(p-1)) is real and finite only for p > 1
    return (p > 1, f"p = m + k = {p} gives a non-real continuation")


def coefficient_closed(geometry, m, k, mode="strict"):
    """Closed-form volumetric coefficient G_k for series offset m.

    With p = m + k:

        G^3D = [B(p - 5/2, 3/2) + 2 B(p - 3/2, 3/2)]/4
        G^2D = 1/(p - 1)
        G^1D = sqrt(pi/(p - 1))/2

    Beta-function terms are evaluated through log-gamma, so large p do not
    overflow.  In strict mode (default) indices with p below the geometry's
    convergence threshold raise RestrictionError; continuation mode extends
    the 2D/1D closed forms to any p where they are finite and real (2D
    values may then be negative).
    """
    geometry = as_geometry(geometry)
    m = int(m)
    k = int(k)
    if k < 0:
        raise DomainError("k must be a nonnegative integer")
    if mode not in ("strict", "continuation"):
        raise DomainError(f"unknown mode {mode!r}")
    okay, reason = _admissible(geometry, m, k, mode)
    p = m + k
    if not okay:
        raise RestrictionError(
            f"G_k undefined for {geometry.label}, m={m}, k={k}: {reason}", p=p
        )
    if geometry.dimension == 3:
        return 0.25 * (np.exp(betaln(p - 2.5, 1.5)) + 2.0 * np.exp(betaln(p - 1.5, 1.5)))
    if geometry.dimension == 2:
        return 1.0 / (p - 1.0)
    return 0.5 * np.sqrt(np.pi / (p - 1.0))


def coefficient_oracle(geometry, m, k, rel_tol=1e-10):
    """G_k by adaptive quadrature of the defining integral.

    Independent numerical check of ``coefficient_closed``: integrates
    K(xi)*xi^(m+k-1) over (0, 1).  The 1D case substitutes u = -ln(xi)
    and then u = v^2, turning the integrand into a Gaussian on (0, inf),
    which removes both endpoint singularities.
    """
    geometry = as_geometry(geometry)
    m = int(m)
    k = int(k)
    p = m + k
    okay, reason = _admissible(geometry, m, k, "strict")
    if not okay:
        raise RestrictionError(
            f"integral diverges for {geometry.label}, m={m}, k={k}: {reason}", p=p
        )
    if geometry.dimension == 3:
        def f(t):
            return 0.25 * (1.0 + 2.0 * t) * np.sqrt(1.0 - t) * t ** (p - 3.5)
        val, err = quad(f, 0.0, 1.0, epsabs=0.0, epsrel=rel_tol * 0.1, limit=200)
    elif geometry.dimension == 2:
        def f(t):
            return t ** (p - 2.0)
        val, err = quad(f, 0.0, 1.0, epsabs=0.0, epsrel=rel_tol * 0.1, limit=200)
    else:
        a = p - 1.0
        def f(v):
            return np.exp(-a * v * v)
        val, err = quad(f, 0.0, np.inf, epsabs=0.0, epsrel=rel_tol * 0.1, limit=200)
    if val <= 0 or err > rel_tol * abs(val):
        raise AccuracyError(
            f"quadrature reached relative error {err / abs(val):.2e} > {rel_tol:.2e} "
            f"for {geometry.label}, m={m}, k={k}",
            achieved=val,
        )
    return val


@dataclass(frozen=True)
class VolumetricCoefficients:
    """Table of G_k for k = 0..k_max with inadmissible indices recorded.

    ``values[k]`` is None exactly when k is excluded.  Immutable and safe
    to share between threads.
    """

    geometry: Geometry
    m: int
    mode: str
    values: tuple
    excluded: tuple

    @property
    def k_max(self):
        return len(self.values) - 1

    @property
    def admissible(self):
        return tuple(k for k in range(len(self.values)) if self.values[k] is not None)

    def value(self, k):
        v = self.values[k]
        if v is None:
            raise RestrictionError(
                f"k={k} is excluded for {self.geometry.label}, m={self.m}", p=self.m + k
            )
        return v

    def as_array(self):
        """Values with excluded entries as NaN."""
        return np.array([np.nan if v is None else v for v in self.values])


def build_coefficients(geometry, m, k_max, mode="strict"):
    """Build the G_k table for k = 0..k_max, recording exclusions."""
    geometry = as_geometry(geometry)
    m = int(m)
    k_max = int(k_max)
    if k_max < 0:
        raise DomainError("k_max must be nonnegative")
    values = []
    excluded = []
    for k in range(k_max + 1):
        try:
            g = coefficient_closed(geometry, m, k, mode=mode)
        except RestrictionError:
            values.append(None)
            excluded.append(k)
            continue
        if not np.isfinite(g) or g == 0.0:
            values.append(None)
            excluded.append(k)
        else:
            values.append(float(g))
    if len(excluded) == k_max + 1:
        raise RestrictionError(
            f"no admissible index k <= {k_max} for {geometry.label} with m={m}"
        )
    return VolumetricCoefficients(
        geometry=geometry, m=m, mode=mode, values=tuple(values), excluded=tuple(excluded)
    )

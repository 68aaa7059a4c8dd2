"""Test problems and reference probability generators.

The two-channel saturating model has a closed-form 2D spatial average and
an explicit series expansion, which makes it an exact oracle for the
inversion pipeline.  The tunneling-rate generator provides realistic
xenon probabilities for the 3D demonstration.
"""

from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp
from scipy.special import gammaln

from .errors import AccuracyError, DomainError
from ._validation import check_positive_scalar

__all__ = [
    "ModelParams",
    "DEFAULT_MODEL",
    "model_probability",
    "model_yield",
    "model_mpe_series",
    "AdkSpecies",
    "XENON_NEUTRAL",
    "XENON_ION",
    "PulseParams",
    "adk_rate",
    "pulse_probabilities",
]

# unit conversions (CODATA)
_HARTREE_EV = 27.211386245988
_ATOMIC_FIELD_INTENSITY_WCM2 = 3.50944758e16   # 1 a.u. field <-> this intensity
_ATOMIC_RATE_PER_S = 4.134137333518e16         # 1/(a.u. time) in 1/s


@dataclass(frozen=True)
class ModelParams:
    """Two-channel saturating probability: orders n1 < n2 at I_S1 < I_S2."""

    n1: int
    n2: int
    I_S1: float
    I_S2: float

    def __post_init__(self):
        if self.n1 < 1 or self.n2 < 1:
            raise DomainError("multiphoton orders must be >= 1")
        check_positive_scalar(self.I_S1, "I_S1")
        check_positive_scalar(self.I_S2, "I_S2")
        # equality gives the (degenerate) identically-cancelling model
        if self.I_S1 > self.I_S2:
            raise DomainError("I_S1 must not exceed I_S2")


# xenon-like saturation parameters for 800 nm, 100 fs pulses
DEFAULT_MODEL = ModelParams(n1=8, n2=14, I_S1=8e13, I_S2=2e14)


def _check_intensity(I):
    arr = np.asarray(I, dtype=float)
    if np.any(~np.isfinite(arr)) or np.any(arr <= 0):
        raise DomainError("intensity must be positive and finite")
    return arr


def model_probability(params, I):
    """P(I) = t1/(1+t1) - t2/(1+t2) with t_i = (I/I_Si)^n_i.

    Vanishes at I -> 0 and I -> inf, peaks between the two saturation
    intensities.
    """
    arr = _check_intensity(I)
    t1 = (arr / params.I_S1) ** params.n1
    t2 = (arr / params.I_S2) ** params.n2
    out = t1 / (1.0 + t1) - t2 / (1.0 + t2)
    return out if isinstance(I, np.ndarray) else float(out)


def model_yield(params, I0):
    """Closed-form 2D spatial average of :func:`model_probability`.

    S(I0) = ln(1 + (I0/I_S1)^n1)/n1 - ln(1 + (I0/I_S2)^n2)/n2.
    """
    arr = _check_intensity(I0)
    t1 = params.n1 * np.log(arr / params.I_S1)
    t2 = params.n2 * np.log(arr / params.I_S2)
    # log1p(exp(t)) evaluated stably for large positive t
    s1 = np.where(t1 > 0, t1 + np.log1p(np.exp(-np.abs(t1))), np.log1p(np.exp(np.minimum(t1, 0))))
    s2 = np.where(t2 > 0, t2 + np.log1p(np.exp(-np.abs(t2))), np.log1p(np.exp(np.minimum(t2, 0))))
    out = s1 / params.n1 - s2 / params.n2
    return out if isinstance(I0, np.ndarray) else float(out)


def model_mpe_series(params, k_max, I):
    """Partial sum of the model's expansion: sum_k (-1)^(k+1) [t1^k - t2^k].

    Converges for I < I_S1 (geometric radius); divergence above that is the
    caller's concern.
    """
    k_max = int(k_max)
    if k_max < 1:
        raise DomainError("k_max must be >= 1")
    arr = _check_intensity(I)
    t1 = (arr / params.I_S1) ** params.n1
    t2 = (arr / params.I_S2) ** params.n2
    out = np.zeros_like(arr, dtype=float)
    for k in range(1, k_max + 1):
        out += (-1.0) ** (k + 1) * (t1**k - t2**k)
    return out if isinstance(I, np.ndarray) else float(out)


@dataclass(frozen=True)
class AdkSpecies:
    """Ionization step data for the tunneling-rate model.

    ``charge_after`` is the ion charge produced by the step; the effective
    principal quantum number is n* = Z/sqrt(2 Ip) in atomic units, and the
    effective orbital number l* = n*(ground) - 1 follows the usual
    noble-gas convention.
    """

    name: str
    ionization_potential_eV: float
    charge_after: int

    def __post_init__(self):
        check_positive_scalar(self.ionization_potential_eV, "ionization_potential_eV")
        if self.charge_after < 1:
            raise DomainError("charge_after must be >= 1")

    @property
    def ip_au(self):
        return self.ionization_potential_eV / _HARTREE_EV

    @property
    def n_star(self):
        return self.charge_after / np.sqrt(2.0 * self.ip_au)

    @property
    def l_star(self):
        return self.n_star - 1.0


# NIST ASD ionization energies for xenon
XENON_NEUTRAL = AdkSpecies("Xe", 12.129843, 1)
XENON_ION = AdkSpecies("Xe+", 20.975, 2)


def adk_rate(species, I):
    """Cycle-averaged tunneling ionization rate in 1/s.

    Standard ADK rate for linear polarization and m = 0, with
    C^2 = 2^(2n*) / (n* Gamma(2n*)) from l* = n* - 1; evaluated in log
    space so small intensities underflow cleanly to zero.
    """
    arr = _check_intensity(I)
    F = np.sqrt(arr / _ATOMIC_FIELD_INTENSITY_WCM2)   # field in a.u.
    ip = species.ip_au
    ns = species.n_star
    F0 = (2.0 * ip) ** 1.5
    log_c2 = 2.0 * ns * np.log(2.0) - np.log(ns) - gammaln(2.0 * ns)
    with np.errstate(divide="ignore"):
        log_w = (
            log_c2
            + 0.5 * np.log(3.0 * F / (np.pi * F0))
            + np.log(ip)
            + (2.0 * ns - 1.0) * np.log(2.0 * F0 / F)
            - 2.0 * F0 / (3.0 * F)
        )
    out = np.exp(log_w) * _ATOMIC_RATE_PER_S
    return out if isinstance(I, np.ndarray) else float(out)


@dataclass(frozen=True)
class PulseParams:
    """Gaussian pulse envelope, intensity FWHM ``duration_fwhm`` seconds."""

    duration_fwhm: float
    envelope: str = "gaussian"

    def __post_init__(self):
        check_positive_scalar(self.duration_fwhm, "duration_fwhm")
        if self.envelope != "gaussian":
            raise DomainError(f"unsupported envelope {self.envelope!r}")


def pulse_probabilities(neutral, ion, pulse, I_peak, rtol=1e-10, atol=1e-14):
    """Final (P1, P2) populations after sequential two-step ionization.

    Integrates dN0/dt = -w1 N0, dN1/dt = w1 N0 - w2 N1, dN2/dt = w2 N1
    over I(t) = I_peak * exp(-4 ln2 t^2 / tau^2) for t in [-3 tau, 3 tau].
    Population is conserved to < 1e-9 or an AccuracyError is raised.
    """
    I_peak = check_positive_scalar(I_peak, "I_peak")
    tau = pulse.duration_fwhm
    a = 4.0 * np.log(2.0) / tau**2

    def envelope(t):
        return I_peak * np.exp(-a * t * t)

    def rates(t):
        It = envelope(t)
        if It <= 0:
            return 0.0, 0.0
        return adk_rate(neutral, It), adk_rate(ion, It)

    def rhs(t, y):
        w1, w2 = rates(t)
        n0, n1, _ = y
        return [-w1 * n0, w1 * n0 - w2 * n1, w2 * n1]

    def jac(t, y):
        w1, w2 = rates(t)
        return [[-w1, 0.0, 0.0], [w1, -w2, 0.0], [0.0, w2, 0.0]]

    sol = solve_ivp(
        rhs,
        (-3.0 * tau, 3.0 * tau),
        [1.0, 0.0, 0.0],
        method="Radau",
        jac=jac,
        rtol=rtol,
        atol=atol,
    )
    if not sol.success:
        raise AccuracyError(f"rate-equation integration failed: {sol.message}")
    n0, n1, n2 = sol.y[:, -1]
    drift = abs(n0 + n1 + n2 - 1.0)
    if drift > 1e-9:
        raise AccuracyError(
            f"population conservation violated by {drift:.2e}", achieved=drift
        )
    return float(n1), float(n2)

import numpy as np
import pytest
from scipy.integrate import quad

from mpeinvert import (
    BeamParameters,
    DomainError,
    GEOMETRY_1D,
    GEOMETRY_2D,
    GEOMETRY_3D,
    Geometry,
    RestrictionError,
    SingularKernelError,
    as_geometry,
    build_coefficients,
    coefficient_closed,
    coefficient_oracle,
    isointensity_volume,
    kernel,
    shell_radius,
)

GEOMETRIES = [GEOMETRY_1D, GEOMETRY_2D, GEOMETRY_3D]


def test_geometry_parsing_and_restrictions():
    assert as_geometry("3D") is GEOMETRY_3D
    assert as_geometry(2) == GEOMETRY_2D
    assert as_geometry(GEOMETRY_1D) is GEOMETRY_1D
    assert GEOMETRY_3D.min_m == 3
    assert GEOMETRY_1D.min_m == 1
    assert GEOMETRY_2D.min_m is None
    with pytest.raises(DomainError):
        Geometry(4)
    with pytest.raises(DomainError):
        as_geometry("4d")


def test_beam_parameters_validate():
    with pytest.raises(DomainError):
        BeamParameters(waist_w0=-1e-6, rayleigh_range_zR=1e-3)
    beam = BeamParameters(waist_w0=10e-6, rayleigh_range_zR=1e-3)
    assert beam.beam_size(0.0) == 10e-6
    assert beam.beam_size(1e-3) == pytest.approx(10e-6 * np.sqrt(2.0))


@pytest.mark.parametrize("geometry", GEOMETRIES)
def test_volume_vanishes_at_peak(geometry):
    assert isointensity_volume(geometry, 1.0) == 0.0


def test_volume_values():
    assert isointensity_volume("2d", 0.5) == pytest.approx(np.log(2.0), rel=1e-14)
    # substitute I0/I = 2 into the 3D shell volume
    expected = 1.0 + 1.0 / 6.0 - np.arctan(1.0)
    assert isointensity_volume("3d", 0.5) == pytest.approx(expected, rel=1e-14)
    assert isointensity_volume("1d", np.exp(-1.0)) == pytest.approx(1.0, rel=1e-14)


@pytest.mark.parametrize("geometry", GEOMETRIES)
def test_volume_monotone_decreasing(geometry):
    xi = np.linspace(0.02, 1.0, 200)
    v = isointensity_volume(geometry, xi)
    assert np.all(np.diff(v) < 0)


def test_volume_domain_errors():
    for bad in (0.0, -0.5, 1.5):
        with pytest.raises(DomainError):
            isointensity_volume("2d", bad)


def physical_volume(xi, beam):
    """Independent oracle: integrate pi*r(z)^2 dz from the shell radius.

    Proportional to the scale-free 3D volume; the proportionality constant
    cancels in ratios.
    """
    I0 = 1.0
    I = xi * I0

    def cross_section(z):
        r = shell_radius(z, I, I0, beam)
        return 0.0 if r is None else np.pi * r * r

    zmax = beam.rayleigh_range_zR * np.sqrt(1.0 / xi - 1.0)
    val, _ = quad(cross_section, -zmax, zmax, limit=300)
    return val


def test_3d_volume_against_shell_radius_integration():
    beam = BeamParameters(waist_w0=10e-6, rayleigh_range_zR=0.5e-3)
    ref = physical_volume(0.5, beam) / isointensity_volume("3d", 0.5)
    for xi in (0.1, 0.25, 0.7, 0.9):
        ratio = physical_volume(xi, beam) / isointensity_volume("3d", xi)
        assert ratio == pytest.approx(ref, rel=1e-7)


def test_kernel_values():
    assert kernel("3d", 1.0) == 0.0
    assert kernel("2d", 1.0) == 1.0
    assert kernel("2d", 0.25) == pytest.approx(4.0, rel=1e-14)
    # exact derivative of the printed volumes: u*(u+2)*sqrt(u-1)/4 at u=2
    assert kernel("3d", 0.5) == pytest.approx(2.0, rel=1e-14)
    # 1D: u/(2*sqrt(ln u)) at ln u = 1
    assert kernel("1d", np.exp(-1.0)) == pytest.approx(np.e / 2.0, rel=1e-14)


def test_kernel_singular_point_is_distinct():
    with pytest.raises(SingularKernelError):
        kernel("1d", 1.0)
    with pytest.raises(DomainError):
        kernel("1d", 1.5)


@pytest.mark.parametrize("geometry", GEOMETRIES)
def test_kernel_matches_volume_derivative(geometry):
    # K(xi) = I0*|dV/dI| with I0 = 1, by central difference at step 1e-7
    delta = 1e-7
    for xi in (0.07, 0.2, 0.45, 0.8, 0.93):
        fd = abs(
            isointensity_volume(geometry, xi + delta)
            - isointensity_volume(geometry, xi - delta)
        ) / (2 * delta)
        assert kernel(geometry, xi) == pytest.approx(fd, rel=1e-6)


def test_kernel_scale_free_through_dimensional_wrapper():
    def dimensional_kernel(geometry, I, I0):
        return kernel(geometry, I / I0)

    for geometry in GEOMETRIES:
        a = dimensional_kernel(geometry, 3e13, 8e13)
        b = dimensional_kernel(geometry, 3e16, 8e16)
        assert a == pytest.approx(b, rel=1e-12)


def test_shell_radius_cases():
    beam = BeamParameters(waist_w0=10e-6, rayleigh_range_zR=1e-3)
    assert shell_radius(0.0, 1e14, 1e14, beam) == 0.0
    # at focus, I = I0/e^2 gives r = w0
    r = shell_radius(0.0, 1e14 / np.e**2, 1e14, beam)
    assert r == pytest.approx(10e-6, rel=1e-12)
    # one Rayleigh range out, the peak-intensity shell no longer exists
    assert shell_radius(1e-3, 1e14, 1e14, beam) is None
    with pytest.raises(DomainError):
        shell_radius(0.0, -1e14, 1e14, beam)


def test_coefficient_closed_values():
    # 2D: G = 1/(m + k - 1); the pure power alpha = 8 case gives 1/8
    assert coefficient_closed("2d", 1, 8) == pytest.approx(0.125, rel=1e-15)
    # 3D, p = 3: [B(1/2,3/2) + 2 B(3/2,3/2)]/4 = 3*pi/16
    assert coefficient_closed("3d", 3, 0) == pytest.approx(3 * np.pi / 16, rel=1e-13)
    # 1D, p = 2: sqrt(pi)/2
    assert coefficient_closed("1d", 2, 0) == pytest.approx(np.sqrt(np.pi) / 2, rel=1e-13)
    assert coefficient_closed("1d", 2, 3) == pytest.approx(
        0.5 * np.sqrt(np.pi / 4.0), rel=1e-13
    )


def test_coefficient_restrictions():
    with pytest.raises(RestrictionError) as err:
        coefficient_closed("3d", 2, 0)
    assert err.value.p == 2
    for k in (0, 1):
        with pytest.raises(RestrictionError):
            coefficient_closed("2d", 0, k)
    # continuation extends 2D to negative powers but keeps the pole out
    assert coefficient_closed("2d", 0, 0, mode="continuation") == pytest.approx(-1.0)
    with pytest.raises(RestrictionError):
        coefficient_closed("2d", 0, 1, mode="continuation")
    assert coefficient_closed("2d", -8, 0, mode="continuation") == pytest.approx(-1.0 / 9.0)
    # 3D stays strict even in continuation mode
    with pytest.raises(RestrictionError):
        coefficient_closed("3d", 2, 0, mode="continuation")


def test_oracle_values():
    assert coefficient_oracle("2d", 3, 0) == pytest.approx(0.5, rel=1e-10)
    assert coefficient_oracle("3d", 3, 0) == pytest.approx(
        coefficient_closed("3d", 3, 0), rel=1e-10
    )
    assert coefficient_oracle("1d", 2, 3) == pytest.approx(
        0.5 * np.sqrt(np.pi / 4.0), rel=1e-10
    )
    with pytest.raises(RestrictionError):
        coefficient_oracle("3d", 1, 0)


@pytest.mark.parametrize("geometry,m", [("1d", 2), ("2d", 1), ("3d", 4)])
def test_oracle_matches_closed_form_sample(geometry, m):
    for k in (0, 3, 11, 25):
        closed = coefficient_closed(geometry, m, k)
        oracle = coefficient_oracle(geometry, m, k)
        assert abs(closed - oracle) / oracle < 1e-8


def test_build_coefficients_table():
    table = build_coefficients("2d", 0, 3)
    assert table.excluded == (0, 1)
    assert table.value(2) == pytest.approx(1.0)
    assert table.value(3) == pytest.approx(0.5)
    with pytest.raises(RestrictionError):
        table.value(0)

    single = build_coefficients("3d", 3, 0)
    assert single.values[0] == pytest.approx(3 * np.pi / 16)

    with pytest.raises(RestrictionError):
        build_coefficients("3d", 2, 0)


def test_large_orders_do_not_overflow():
    table = build_coefficients("3d", 3, 60)
    vals = table.as_array()
    assert np.all(np.isfinite(vals))
    assert np.all(vals > 0)


@pytest.mark.parametrize("geometry,m", [("1d", 1), ("2d", 2), ("3d", 3)])
def test_positivity_and_monotone_decrease(geometry, m):
    table = build_coefficients(geometry, m, 40)
    vals = [table.value(k) for k in table.admissible]
    assert all(v > 0 for v in vals)
    assert all(a > b for a, b in zip(vals, vals[1:]))

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mpeinvert import DomainError, PowerSeries, evaluate_series


def test_basic_evaluations():
    zero = PowerSeries(m=1, coefficients=(0.0, 0.0, 0.0), reference_intensity=1e14)
    assert evaluate_series(zero, 5e13) == 0.0

    unit = PowerSeries(m=1, coefficients=(1.0,), reference_intensity=1e14)
    assert evaluate_series(unit, 1e14) == 1.0

    s = PowerSeries(m=3, coefficients=(2.0,), reference_intensity=1e14)
    assert evaluate_series(s, 5e13) == pytest.approx(0.5, rel=1e-15)


def test_validation():
    with pytest.raises(DomainError):
        PowerSeries(m=1, coefficients=(), reference_intensity=1e14)
    with pytest.raises(DomainError):
        PowerSeries(m=1, coefficients=(1.0,), reference_intensity=-1.0)
    s = PowerSeries(m=1, coefficients=(1.0,), reference_intensity=1e14)
    with pytest.raises(DomainError):
        evaluate_series(s, 0.0)
    with pytest.raises(DomainError):
        evaluate_series(s, -1e13)


def test_array_evaluation_matches_scalar():
    s = PowerSeries(m=0, coefficients=(0.5, -1.0, 2.0), reference_intensity=1e14)
    grid = np.array([1e13, 5e13, 1e14])
    vec = evaluate_series(s, grid)
    assert vec == pytest.approx([evaluate_series(s, g) for g in grid])


def test_cancellation_against_extended_precision():
    # alternating large coefficients that cancel heavily at x near 1
    rng = np.random.default_rng(3)
    coeffs = tuple(((-1.0) ** k) * rng.uniform(0.5, 1.0) * 10.0**6 for k in range(20))
    s = PowerSeries(m=1, coefficients=coeffs, reference_intensity=1.0)
    for x in (0.31, 0.77, 0.999):
        got = evaluate_series(s, x)
        with mp.workdps(60):
            want = float(
                mp.fsum(mp.mpf(c) * mp.mpf(x) ** k for k, c in enumerate(coeffs))
            )
        assert got == pytest.approx(want, abs=1e-9 * max(abs(c) for c in coeffs) * 1e-15)


@settings(max_examples=25, deadline=None)
@given(
    st.lists(st.floats(-5, 5), min_size=1, max_size=8),
    st.floats(0.01, 1.0),
)
def test_scaling_and_linearity(coeffs, x):
    base = PowerSeries(m=2, coefficients=tuple(coeffs), reference_intensity=1.0)
    doubled = base.scaled(2.0)
    assert evaluate_series(doubled, x) == pytest.approx(
        2.0 * evaluate_series(base, x), rel=1e-12, abs=1e-300
    )

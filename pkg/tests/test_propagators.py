import numpy as np
import pytest

from trapnls.errors import SingularTime
from trapnls.grid import Field, GridSpec, forward_transform, hermite_basis, inverse_transform
from trapnls.propagators import (
    dispersive_bound_check,
    linear_propagate,
    linear_propagate_field,
    linear_step,
    mehler_apply,
)

GRID = GridSpec(d=2, n=1, hermite_order=48, box_half_length=15.0, free_points=64)


def confined_profile(grid=GRID, shift=0.4):
    x = grid.hermite_nodes()[:, None]
    const = 1.0 / np.sqrt(2.0 * grid.box_half_length)
    vals = np.exp(-0.5 * (x - shift) ** 2) * const * np.ones(grid.free_points)
    return Field(grid, vals.astype(complex))


def test_propagator_unitary_and_group_law():
    f = confined_profile()
    c = forward_transform(f)
    assert linear_propagate(c, 0.8).norm() == pytest.approx(c.norm(), rel=1e-13)
    two_steps = linear_propagate(linear_propagate(c, 0.3), 0.5)
    one_step = linear_propagate(c, 0.8)
    assert np.max(np.abs(two_steps.coeffs - one_step.coeffs)) < 1e-13


def test_inverse_propagation():
    f = confined_profile()
    c = forward_transform(f)
    back = linear_propagate(linear_propagate(c, 1.7), -1.7)
    assert np.max(np.abs(back.coeffs - c.coeffs)) < 1e-13


def test_linear_step_matches_spectral_route():
    f = confined_profile()
    a = linear_step(f, 0.37)
    b = linear_propagate_field(f, 0.37)
    assert np.max(np.abs(a.values - b.values)) < 1e-12


def test_mehler_matches_spectral_route():
    f = confined_profile()
    for t in (0.3, 1.0, 2.5, -1.2):
        spec = linear_propagate_field(f, t)
        kern = mehler_apply(f, t)
        assert (spec - kern).norm() / f.norm() < 1e-10


def test_mehler_quarter_period_is_fourier_transform():
    # e^{-i (pi/2) H_1} = e^{-i pi/4} * unitary Fourier transform
    # the unitary Fourier transform of exp(-(x-1)^2/2) is exp(-xi^2/2 - i xi)
    f = confined_profile(shift=1.0)
    out = mehler_apply(f, np.pi / 2.0)
    x = GRID.hermite_nodes()
    ref = (
        np.exp(-1j * np.pi / 4.0)
        * np.exp(-0.5 * x**2 - 1j * x)
        / np.sqrt(2.0 * GRID.box_half_length)
    )
    assert np.max(np.abs(out.values[:, 0] - ref)) < 1e-9


def test_mehler_refuses_refocusing_times():
    f = confined_profile()
    with pytest.raises(SingularTime):
        mehler_apply(f, np.pi)
    with pytest.raises(SingularTime):
        mehler_apply(f, 0.0)


def test_dispersive_bound():
    out = dispersive_bound_check(np.pi / 2.0, n=1)
    assert out["bound"] == pytest.approx((2.0 * np.pi) ** -0.5, rel=1e-12)
    assert out["ratio"] == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(SingularTime):
        dispersive_bound_check(np.pi, n=1)


def test_refocusing_modulus_periodicity():
    f = confined_profile()
    c = forward_transform(f)
    a = np.abs(inverse_transform(linear_propagate(c, 0.9)).values)
    b = np.abs(inverse_transform(linear_propagate(c, 0.9 + 2.0 * np.pi)).values)
    assert np.max(np.abs(a - b)) < 1e-12

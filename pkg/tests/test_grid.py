import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from trapnls.grid import (
    Field,
    GridSpec,
    SpectralCoeffs,
    apply_coordinate,
    apply_gradient,
    forward_transform,
    hermite_basis,
    inverse_transform,
)

GRID = GridSpec(d=2, n=1, hermite_order=16, box_half_length=12.0, free_points=32)


def random_field(seed: int, grid: GridSpec = GRID) -> Field:
    rng = np.random.default_rng(seed)
    vals = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
    return Field(grid, vals)


def test_gridspec_validation():
    with pytest.raises(ValueError):
        GridSpec(d=5, n=1, hermite_order=16, box_half_length=10.0, free_points=32)
    with pytest.raises(ValueError):
        GridSpec(d=2, n=2, hermite_order=16, box_half_length=10.0, free_points=32)
    with pytest.raises(ValueError):
        GridSpec(d=2, n=1, hermite_order=4, box_half_length=10.0, free_points=32)
    with pytest.raises(ValueError):
        GridSpec(d=2, n=1, hermite_order=16, box_half_length=10.0, free_points=33)


def test_hermite_basis_orthonormal():
    K = 40
    g = GridSpec(d=2, n=1, hermite_order=K, box_half_length=10.0, free_points=16)
    psi = hermite_basis(K, g.hermite_nodes())
    gram = (psi * g.hermite_weights()) @ psi.T
    assert np.max(np.abs(gram - np.eye(K))) < 1e-12


def test_basis_element_maps_to_unit_coefficient():
    psi = hermite_basis(16, GRID.hermite_nodes())
    y = GRID.free_coordinates()
    plane = np.exp(1j * GRID.wavenumbers()[1] * y) / np.sqrt(2 * GRID.box_half_length)
    f = Field(GRID, np.multiply.outer(psi[3].astype(complex), plane))
    c = forward_transform(f).coeffs
    expected = np.zeros(GRID.shape, dtype=complex)
    expected[3, 1] = 1.0
    assert np.max(np.abs(c - expected)) < 1e-12


@given(st.integers(0, 2**31 - 1))
@settings(max_examples=25, deadline=None)
def test_transform_round_trip(seed):
    f = random_field(seed)
    back = inverse_transform(forward_transform(f))
    assert np.max(np.abs(back.values - f.values)) < 1e-12 * max(1.0, np.max(np.abs(f.values)))


@given(st.integers(0, 2**31 - 1))
@settings(max_examples=25, deadline=None)
def test_parseval(seed):
    f = random_field(seed)
    assert forward_transform(f).norm() == pytest.approx(f.norm(), rel=1e-12)


def test_gradient_gaussian_oracle():
    # d/dx psi_0 = -x psi_0
    psi = hermite_basis(16, GRID.hermite_nodes())
    f = Field(GRID, np.multiply.outer(psi[0], np.ones(32)).astype(complex))
    df = apply_gradient(f, 0)
    xf = apply_coordinate(f, 0)
    assert np.max(np.abs(df.values + xf.values)) < 1e-12


def test_free_gradient_plane_wave():
    y = GRID.free_coordinates()
    eta = GRID.wavenumbers()[5]
    f = Field(GRID, np.multiply.outer(np.ones(16), np.exp(1j * eta * y)))
    df = apply_gradient(f, 1)
    assert np.max(np.abs(df.values - 1j * eta * f.values)) < 1e-10


def test_field_operations_grid_mismatch():
    other = GridSpec(d=2, n=1, hermite_order=16, box_half_length=10.0, free_points=32)
    with pytest.raises(ValueError):
        random_field(0) + random_field(0, other)


def test_shape_mismatch_rejected():
    with pytest.raises(ValueError):
        Field(GRID, np.zeros((16, 16), dtype=complex))
    with pytest.raises(ValueError):
        SpectralCoeffs(GRID, np.zeros((16, 16), dtype=complex))

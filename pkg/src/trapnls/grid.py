"""Mixed Hermite-Fourier discretization.

Confined axes use Gauss-Hermite collocation (K nodes, K orthonormal
Hermite functions); free axes use a uniform periodic grid on [-L, L)
with the unitary discrete Fourier transform. The discrete L2 inner
product uses the Gauss-Hermite quadrature weights on confined axes and
the trapezoidal weight h = 2L/M on free axes, so Parseval holds to
roundoff between node values and spectral coefficients.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

__all__ = [
    "GridSpec",
    "Field",
    "SpectralCoeffs",
    "hermite_basis",
    "forward_transform",
    "inverse_transform",
    "apply_gradient",
    "apply_coordinate",
]


@dataclass(frozen=True)
class GridSpec:
    """Discretization contract: d total dimensions, the first n confined."""

    d: int
    n: int
    hermite_order: int
    box_half_length: float
    free_points: int

    def __post_init__(self):
        if not (2 <= self.d <= 4):
            raise ValueError(f"d must be in [2, 4], got {self.d}")
        if not (1 <= self.n <= self.d - 1):
            raise ValueError(f"n must satisfy 1 <= n <= d-1, got n={self.n}, d={self.d}")
        if self.hermite_order < 8:
            raise ValueError(f"hermite_order must be >= 8, got {self.hermite_order}")
        if self.box_half_length <= 0:
            raise ValueError("box_half_length must be positive")
        if self.free_points < 16 or self.free_points % 2:
            raise ValueError(f"free_points must be an even integer >= 16, got {self.free_points}")

    @property
    def free_dims(self) -> int:
        return self.d - self.n

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.hermite_order,) * self.n + (self.free_points,) * self.free_dims

    @property
    def free_spacing(self) -> float:
        return 2.0 * self.box_half_length / self.free_points

    def hermite_nodes(self) -> np.ndarray:
        return _gauss_hermite(self.hermite_order)[0]

    def hermite_weights(self) -> np.ndarray:
        """Quadrature weights for plain-dx integration at the nodes."""
        return _gauss_hermite(self.hermite_order)[1]

    def free_coordinates(self) -> np.ndarray:
        M, L = self.free_points, self.box_half_length
        return -L + self.free_spacing * np.arange(M)

    def wavenumbers(self) -> np.ndarray:
        """Free-axis wavenumbers pi*m/L in FFT storage order."""
        M, L = self.free_points, self.box_half_length
        return 2.0 * np.pi * np.fft.fftfreq(M, d=2.0 * L / M)

    def axis_coordinates(self, axis: int) -> np.ndarray:
        if not (0 <= axis < self.d):
            raise ValueError(f"axis {axis} out of range for d={self.d}")
        return self.hermite_nodes() if axis < self.n else self.free_coordinates()

    def quad_weights(self) -> np.ndarray:
        """Full tensor quadrature weight, broadcast to the grid shape."""
        return _quad_weights(self)


@lru_cache(maxsize=None)
def _gauss_hermite(K: int) -> tuple[np.ndarray, np.ndarray]:
    nodes, w = np.polynomial.hermite.hermgauss(K)
    # hermgauss weights target the e^{-x^2} measure; fold it back so the
    # weights integrate against plain dx for Gaussian-decaying integrands.
    return nodes, w * np.exp(nodes**2)


def hermite_basis(K: int, nodes: np.ndarray) -> np.ndarray:
    """Orthonormal Hermite functions psi_k at the given nodes, shape (K, len(nodes)).

    Uses the stable three-term recurrence
    psi_{k+1} = x sqrt(2/(k+1)) psi_k - sqrt(k/(k+1)) psi_{k-1}.
    """
    if K < 1:
        raise ValueError("K must be >= 1")
    nodes = np.asarray(nodes, dtype=float)
    if nodes.ndim != 1 or len(nodes) != K:
        raise ValueError(f"expected {K} collocation nodes, got shape {nodes.shape}")
    psi = np.empty((K, len(nodes)))
    psi[0] = np.pi ** (-0.25) * np.exp(-0.5 * nodes**2)
    if K > 1:
        psi[1] = np.sqrt(2.0) * nodes * psi[0]
    for k in range(1, K - 1):
        psi[k + 1] = nodes * np.sqrt(2.0 / (k + 1)) * psi[k] - np.sqrt(k / (k + 1.0)) * psi[k - 1]
    if not np.all(np.isfinite(psi)):
        raise OverflowError(f"Hermite recurrence overflowed at order K={K}")
    return psi


@lru_cache(maxsize=None)
def _hermite_matrices(K: int) -> tuple[np.ndarray, np.ndarray]:
    """(analysis, synthesis): c = A f, f = B c along one confined axis."""
    nodes, W = _gauss_hermite(K)
    psi = hermite_basis(K, nodes)
    return psi * W[np.newaxis, :], psi.T.copy()


@lru_cache(maxsize=None)
def _quad_weights(grid: GridSpec) -> np.ndarray:
    w = np.ones(())
    for ax in range(grid.d):
        if ax < grid.n:
            w1 = grid.hermite_weights()
        else:
            w1 = np.full(grid.free_points, grid.free_spacing)
        w = np.multiply.outer(w, w1)
    w = w.reshape(grid.shape)
    w.flags.writeable = False
    return w


@lru_cache(maxsize=None)
def _fourier_scale(grid: GridSpec) -> np.ndarray:
    """Per-mode factor turning the ortho-FFT into coefficients of
    e^{i eta_m y} sampled at y_j = -L + j h: sqrt(h) * (-1)^m per free axis."""
    M = grid.free_points
    m = np.rint(np.fft.fftfreq(M) * M).astype(int)
    s1 = np.sqrt(grid.free_spacing) * np.where(m % 2 == 0, 1.0, -1.0)
    s = np.ones(())
    for _ in range(grid.free_dims):
        s = np.multiply.outer(s, s1)
    s = s.reshape((1,) * grid.n + (M,) * grid.free_dims)
    s.flags.writeable = False
    return s


@dataclass(frozen=True)
class Field:
    """Complex wavefunction samples on the mixed collocation grid."""

    grid: GridSpec
    values: np.ndarray

    def __post_init__(self):
        if self.values.shape != self.grid.shape:
            raise ValueError(
                f"field shape {self.values.shape} does not match grid {self.grid.shape}"
            )

    def mass(self) -> float:
        return float(np.sum(self.grid.quad_weights() * np.abs(self.values) ** 2))

    def norm(self) -> float:
        return float(np.sqrt(self.mass()))

    def inner(self, other: "Field") -> complex:
        _check_same_grid(self, other)
        return complex(np.sum(self.grid.quad_weights() * np.conj(self.values) * other.values))

    def lp_norm(self, r: float) -> float:
        """Quadrature L^r norm; r = inf is the max over collocation nodes."""
        if np.isinf(r):
            return float(np.max(np.abs(self.values)))
        return float(np.sum(self.grid.quad_weights() * np.abs(self.values) ** r) ** (1.0 / r))

    def __add__(self, other: "Field") -> "Field":
        _check_same_grid(self, other)
        return Field(self.grid, self.values + other.values)

    def __sub__(self, other: "Field") -> "Field":
        _check_same_grid(self, other)
        return Field(self.grid, self.values - other.values)

    def __mul__(self, a) -> "Field":
        return Field(self.grid, self.values * a)

    __rmul__ = __mul__


@dataclass(frozen=True)
class SpectralCoeffs:
    """Coefficients in the Hermite (x) Fourier basis; the linear flow is
    diagonal in this representation."""

    grid: GridSpec
    coeffs: np.ndarray

    def __post_init__(self):
        if self.coeffs.shape != self.grid.shape:
            raise ValueError(
                f"coefficient shape {self.coeffs.shape} does not match grid {self.grid.shape}"
            )

    def norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))


def _check_same_grid(a, b) -> None:
    if a.grid != b.grid:
        raise ValueError("operands live on different grids")


def _apply_along_axis(mat: np.ndarray, values: np.ndarray, axis: int) -> np.ndarray:
    out = np.tensordot(mat, np.moveaxis(values, axis, 0), axes=(1, 0))
    return np.moveaxis(out, 0, axis)


def forward_transform(f: Field) -> SpectralCoeffs:
    """Hermite analysis on confined axes composed with the unitary DFT on
    free axes; Parseval holds to roundoff."""
    g = f.grid
    a = np.asarray(f.values, dtype=complex)
    analysis, _ = _hermite_matrices(g.hermite_order)
    for ax in range(g.n):
        a = _apply_along_axis(analysis, a, ax)
    if g.free_dims:
        free_axes = tuple(range(g.n, g.d))
        a = np.fft.fftn(a, axes=free_axes, norm="ortho") * _fourier_scale(g)
    return SpectralCoeffs(g, a)


def inverse_transform(c: SpectralCoeffs) -> Field:
    g = c.grid
    a = np.asarray(c.coeffs, dtype=complex)
    if g.free_dims:
        free_axes = tuple(range(g.n, g.d))
        a = np.fft.ifftn(a / _fourier_scale(g), axes=free_axes, norm="ortho")
    _, synthesis = _hermite_matrices(g.hermite_order)
    for ax in range(g.n):
        a = _apply_along_axis(synthesis, a, ax)
    return Field(g, a)


def apply_gradient(f: Field, axis: int) -> Field:
    """Spectral partial derivative along one axis.

    Confined axes use the Hermite ladder relation
    d psi_k = sqrt(k/2) psi_{k-1} - sqrt((k+1)/2) psi_{k+1};
    free axes use the Fourier multiplier i*eta.
    """
    g = f.grid
    if not (0 <= axis < g.d):
        raise ValueError(f"axis {axis} out of range for d={g.d}")
    if axis < g.n:
        K = g.hermite_order
        analysis, synthesis = _hermite_matrices(K)
        c = _apply_along_axis(analysis, np.asarray(f.values, dtype=complex), axis)
        k = np.arange(K)
        dc = np.zeros_like(c)
        up = np.sqrt((k[:-1] + 1) / 2.0)  # coefficient of c_{j+1} in c'_j
        dn = np.sqrt(k[1:] / 2.0)  # coefficient of c_{j-1} in c'_j
        sl = [slice(None)] * g.d
        lo, hi = sl.copy(), sl.copy()
        lo[axis], hi[axis] = slice(0, K - 1), slice(1, K)
        shape1 = [1] * g.d
        shape1[axis] = K - 1
        dc[tuple(lo)] += up.reshape(shape1) * c[tuple(hi)]
        dc[tuple(hi)] -= dn.reshape(shape1) * c[tuple(lo)]
        return Field(g, _apply_along_axis(synthesis, dc, axis))
    eta = g.wavenumbers()
    shape1 = [1] * g.d
    shape1[axis] = g.free_points
    ft = np.fft.fft(np.asarray(f.values, dtype=complex), axis=axis)
    return Field(g, np.fft.ifft(1j * eta.reshape(shape1) * ft, axis=axis))


def apply_coordinate(f: Field, axis: int) -> Field:
    """Pointwise multiplication by the coordinate along one axis."""
    g = f.grid
    x = g.axis_coordinates(axis)
    shape1 = [1] * g.d
    shape1[axis] = len(x)
    return Field(g, f.values * x.reshape(shape1))

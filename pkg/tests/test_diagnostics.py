import numpy as np
import pytest

from trapnls.cli import InitialDatum, build_initial
from trapnls.diagnostics import (
    MORAWETZ_BOUND_CONSTANT,
    MarginalDensity,
    apply_vector_field,
    conserved_quantities,
    decay_exponent_fit,
    marginal_density,
    morawetz_monitor,
    morawetz_seminorm,
    sigma_norm_parts,
    strichartz_window_norm,
    vector_field_norms,
    virial_and_action,
)
from trapnls.errors import AdmissibilityError
from trapnls.grid import Field, GridSpec, apply_coordinate, apply_gradient
from trapnls.solver import SimParams, run_simulation

GRID = GridSpec(d=2, n=1, hermite_order=24, box_half_length=30.0, free_points=128)


def gaussian(amplitude=0.5, k=0):
    init = InitialDatum(kind="hermite_gaussian", k=[k], amplitude=amplitude)
    return build_initial(GRID, init)


def test_conserved_quantities_closed_form():
    # psi_k (x) Gaussian: mass a^2, linear energy a^2 (k + 1/2 + 1/4)
    a = 0.7
    for k in (0, 2):
        mass, energy = conserved_quantities(gaussian(a, k), lam=0.0, sigma=1.0)
        assert mass == pytest.approx(a**2, rel=1e-12)
        assert energy == pytest.approx(a**2 * (k + 0.75), rel=1e-10)


def test_nonlinear_energy_term():
    a = 0.5
    u = gaussian(a)
    _, e0 = conserved_quantities(u, lam=0.0, sigma=1.0)
    _, e1 = conserved_quantities(u, lam=2.0, sigma=1.0)
    # lam/(sigma+1) * ||u||_4^4; each width-1 Gaussian factor contributes
    # integral |psi_0|^4 = 1/sqrt(2 pi)
    assert e1 - e0 == pytest.approx(a**4 / (2.0 * np.pi), rel=1e-8)


def test_sigma_norm_parts_closed_form():
    a = 0.8
    nx, ny, ng = sigma_norm_parts(gaussian(a))
    assert nx == pytest.approx(a / np.sqrt(2.0), rel=1e-10)
    assert ny == pytest.approx(a / np.sqrt(2.0), rel=1e-10)
    assert ng == pytest.approx(a, rel=1e-10)


def test_energy_rotation_identity_pointwise():
    rng = np.random.default_rng(11)
    vals = rng.standard_normal(GRID.shape) + 1j * rng.standard_normal(GRID.shape)
    f = Field(GRID, vals)
    t = 0.83
    lhs = sum(np.abs(c.values) ** 2 for c in apply_vector_field(1, t, f))
    lhs += sum(np.abs(c.values) ** 2 for c in apply_vector_field(2, t, f))
    rhs = np.abs(apply_coordinate(f, 0).values) ** 2 + np.abs(apply_gradient(f, 0).values) ** 2
    assert np.max(np.abs(lhs - rhs)) < 1e-10 * np.max(rhs)


def test_vector_field_identity_at_zero_time():
    f = gaussian()
    norms = vector_field_norms(0.0, f)
    nx, ny, _ = sigma_norm_parts(f)
    # at t=0: A1 = -i grad_x, A2 = x, A3 = -i grad_y, A4 = y
    assert norms[1] == pytest.approx(nx, rel=1e-10)
    assert norms[3] == pytest.approx(ny, rel=1e-10)


def test_marginal_density_integrates_to_mass():
    f = gaussian(0.6)
    md = marginal_density(f)
    assert float(np.sum(md.R)) * GRID.free_spacing == pytest.approx(f.mass(), rel=1e-12)


def test_virial_two_point_oracle():
    # two point masses: I = (1/2) * 2 * m^2 |y1 - y0|, M = 0 for zero current
    g = GRID
    R = np.zeros(g.free_points)
    i0, i1 = 30, 50
    h = g.free_spacing
    R[i0] = R[i1] = 1.0 / h  # unit masses
    J = np.zeros((1, g.free_points))
    md = MarginalDensity(0.0, g, R, J)
    I, M = virial_and_action(md)
    y = g.free_coordinates()
    assert I == pytest.approx(abs(y[i1] - y[i0]), rel=1e-12)
    assert M == pytest.approx(0.0, abs=1e-14)


def test_morawetz_seminorm_parseval_oracle():
    # for d - n = 1 the multiplier is |eta|^2: seminorm = ||R'||^2
    f = gaussian(0.5)
    md = marginal_density(f)
    R = md.R
    dR = np.fft.ifft(1j * GRID.wavenumbers() * np.fft.fft(R))
    expected = float(np.sum(np.abs(dR) ** 2) * GRID.free_spacing)
    assert morawetz_seminorm(md) == pytest.approx(expected, rel=1e-10)


def test_morawetz_monitor_defocusing_run():
    p = SimParams(lam=1.0, sigma=1.0, dt=0.01, t0=0.0, t1=3.0, sample_stride=10)
    traj = run_simulation(gaussian(0.8), p, probes=("mass", "morawetz"))
    rep = morawetz_monitor(traj)
    assert rep.verdicts["didt_equals_action"]
    assert rep.verdicts["action_pointwise_bound"]
    assert rep.verdicts["cumulative_bound"]
    assert rep.bound_constant == MORAWETZ_BOUND_CONSTANT[1]


def test_strichartz_rejects_inadmissible_pairs():
    p = SimParams(lam=0.0, sigma=1.0, dt=0.5, t0=0.0, t1=8.0)
    traj = run_simulation(gaussian(0.3), p, probes=("mass",))
    with pytest.raises(AdmissibilityError):
        strichartz_window_norm(traj, 8.0, 3.0, 4.0)  # (q, r) not 2-admissible
    out = strichartz_window_norm(traj, 8.0, 4.0, 4.0)
    assert out["norm"] > 0 and out["windows"] >= 2


def test_decay_fit_window_validation():
    p = SimParams(lam=0.0, sigma=1.0, dt=0.5, t0=0.0, t1=4.0)
    traj = run_simulation(gaussian(0.3), p, probes=("mass",))
    with pytest.raises(ValueError):
        decay_exponent_fit(traj, 4.0, (0.1, 4.0))
    with pytest.raises(ValueError):
        decay_exponent_fit(traj, 4.0, (3.4, 3.6))

import numpy as np
import pytest

from trapnls.cli import InitialDatum, build_initial
from trapnls.errors import BoundaryMassExceeded
from trapnls.grid import Field, GridSpec
from trapnls.solver import SimParams, TrajectoryHandle, nonlinear_step, run_simulation, strang_step

GRID = GridSpec(d=2, n=1, hermite_order=24, box_half_length=30.0, free_points=96)


def gaussian(amplitude=0.5, momentum=0.0):
    init = InitialDatum(kind="hermite_gaussian", k=[0], momentum=[momentum], amplitude=amplitude)
    return build_initial(GRID, init)


def test_simparams_validation():
    with pytest.raises(ValueError):
        SimParams(lam=1.0, sigma=0.0, dt=0.1)
    with pytest.raises(ValueError):
        SimParams(lam=1.0, sigma=1.0, dt=-0.1)
    with pytest.raises(ValueError):
        SimParams(lam=1.0, sigma=1.0, dt=0.1, t0=1.0, t1=0.5)
    with pytest.raises(ValueError):
        SimParams(lam=1.0, sigma=1.0, dt=0.1, sample_stride=0)


def test_supercritical_warning():
    g3 = GridSpec(d=3, n=1, hermite_order=8, box_half_length=10.0, free_points=16)
    with pytest.warns(UserWarning):
        SimParams(lam=1.0, sigma=2.5, dt=0.1).validate_regime(g3)


def test_nonlinear_step_is_exact_phase_rotation():
    f = gaussian()
    out = nonlinear_step(f, 0.2, lam=2.0, sigma=1.0)
    expected = f.values * np.exp(-2.0j * 0.2 * np.abs(f.values) ** 2)
    assert np.max(np.abs(out.values - expected)) < 1e-15
    # |u| preserved to roundoff, and steps compose
    assert np.max(np.abs(np.abs(out.values) - np.abs(f.values))) < 1e-16
    twice = nonlinear_step(nonlinear_step(f, 0.1, 2.0, 1.0), 0.1, 2.0, 1.0)
    once = nonlinear_step(f, 0.2, 2.0, 1.0)
    assert np.max(np.abs(twice.values - once.values)) < 1e-14


def test_nonlinear_step_fractional_power_at_zero():
    vals = np.zeros(GRID.shape, dtype=complex)
    vals[0, 0] = 1.0
    out = nonlinear_step(Field(GRID, vals), 0.1, lam=1.0, sigma=0.25)
    assert np.all(np.isfinite(out.values))


def test_mass_conserved_short_run():
    p = SimParams(lam=1.0, sigma=3.0, dt=0.01, t0=0.0, t1=1.0, sample_stride=10)
    traj = run_simulation(gaussian(), p, probes=("mass",))
    m0 = traj.records[0].mass
    assert max(abs(r.mass - m0) / m0 for r in traj.records) < 1e-13


def test_energy_drift_second_order():
    def drift(dt):
        p = SimParams(lam=1.0, sigma=1.0, dt=dt, t0=0.0, t1=1.0, sample_stride=int(0.5 / dt))
        traj = run_simulation(gaussian(amplitude=1.0), p, probes=("mass", "energy"))
        e0 = traj.records[0].energy
        return max(abs(r.energy - e0) for r in traj.records)

    assert drift(0.02) / drift(0.01) == pytest.approx(4.0, rel=0.25)


def test_run_matches_composed_strang_steps():
    p = SimParams(lam=1.0, sigma=1.0, dt=0.05, t0=0.0, t1=0.5, sample_stride=10)
    traj = run_simulation(gaussian(), p, probes=("mass",))
    f = gaussian()
    for _ in range(10):
        f = strang_step(f, 0.05, p)
    assert np.max(np.abs(traj.snapshots[-1].values - f.values)) < 1e-11


def test_boundary_mass_abort():
    # fast-moving packet reaches the box edge and must abort the run
    p = SimParams(lam=0.0, sigma=1.0, dt=0.05, t0=0.0, t1=40.0, boundary_mass_tol=1e-3)
    with pytest.raises(BoundaryMassExceeded):
        run_simulation(gaussian(momentum=2.0), p, probes=("mass",))


def test_trajectory_handle_invariants():
    p = SimParams(lam=1.0, sigma=1.0, dt=0.1)
    traj = TrajectoryHandle(GRID, p)
    traj.append(0.0, gaussian())
    with pytest.raises(ValueError):
        traj.append(0.0, gaussian())
    other = GridSpec(d=2, n=1, hermite_order=16, box_half_length=30.0, free_points=96)
    bad = build_initial(other, InitialDatum(kind="hermite_gaussian", k=[0]))
    with pytest.raises(ValueError):
        traj.append(1.0, bad)
    traj.append(1.0, gaussian())
    t, f = traj.field_at(0.9)
    assert t == 1.0


def test_unknown_probe_rejected():
    p = SimParams(lam=1.0, sigma=1.0, dt=0.1, t1=0.2)
    with pytest.raises(ValueError, match="unknown probes"):
        run_simulation(gaussian(), p, probes=("mass", "bogus"))

"""Scalar and marginal observables of a trajectory.

Conserved quantities, Sigma-norm pieces, the rotated phase-space vector
fields, marginal mass/current densities, virial and Morawetz-action
functionals, the marginal smoothing seminorm, decay-exponent fits and
windowed dispersive norms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import AdmissibilityError
from .grid import Field, GridSpec, apply_coordinate, apply_gradient, forward_transform
from .solver import TrajectoryHandle

__all__ = [
    "DiagnosticsRecord",
    "MarginalDensity",
    "MorawetzReport",
    "conserved_quantities",
    "apply_vector_field",
    "vector_field_norms",
    "sigma_norm",
    "sigma_norm_parts",
    "grad_y_norm",
    "decay_exponent_fit",
    "marginal_density",
    "virial_and_action",
    "morawetz_seminorm",
    "morawetz_monitor",
    "strichartz_window_norm",
    "diagnostics_record",
]

KNOWN_PROBES = frozenset(
    {"mass", "energy", "sigma", "vector_fields", "morawetz", "lr_norms", "boundary"}
)


@dataclass
class DiagnosticsRecord:
    """Per-sample scalars; fields not selected by the probes stay None."""

    t: float
    mass: float
    energy: float | None = None
    sigma_norm_parts: tuple[float, float, float] | None = None
    vf_norms: tuple[float, float, float, float] | None = None
    virial_I: float | None = None
    action_M: float | None = None
    morawetz_integrand: float | None = None
    cumulative_morawetz: float | None = None
    grad_y: float | None = None
    boundary_mass_fraction: float | None = None
    lr_norms: dict[float, float] = field(default_factory=dict)


@dataclass(frozen=True)
class MarginalDensity:
    """Mass density and current integrated over the confined axes."""

    t: float
    grid: GridSpec
    R: np.ndarray  # shape (M,)*(d-n), nonnegative
    J_marg: np.ndarray  # shape (d-n,) + (M,)*(d-n)


def _confined_weights(grid: GridSpec) -> np.ndarray:
    w = np.ones(())
    for _ in range(grid.n):
        w = np.multiply.outer(w, grid.hermite_weights())
    return w.reshape((grid.hermite_order,) * grid.n)


def conserved_quantities(f: Field, lam: float, sigma: float) -> tuple[float, float]:
    """(mass, energy); the quadratic part is summed spectrally, the
    nonlinear part by quadrature on the collocation values."""
    g = f.grid
    c = forward_transform(f).coeffs
    mass = float(np.sum(np.abs(c) ** 2))
    K = g.hermite_order
    quad = np.zeros(())
    for _ in range(g.n):
        quad = np.add.outer(quad, np.arange(K) + 0.5)
    eta2 = g.wavenumbers() ** 2
    for _ in range(g.free_dims):
        quad = np.add.outer(quad, 0.5 * eta2)
    energy = float(np.sum(quad.reshape(g.shape) * np.abs(c) ** 2))
    if lam != 0.0:
        energy += lam / (sigma + 1.0) * f.lp_norm(2.0 * sigma + 2.0) ** (2.0 * sigma + 2.0)
    return mass, energy


def apply_vector_field(j: int, t: float, f: Field) -> tuple[Field, ...]:
    """Component fields of A_j(t)u.

    A1 = x sin t - i cos t grad_x, A2 = x cos t + i sin t grad_x (one
    component per confined axis); A3 = -i grad_y, A4 = y + i t grad_y
    (one per free axis); A0 = identity.
    """
    g = f.grid
    if j == 0:
        return (f,)
    s, c = math.sin(t), math.cos(t)
    if j == 1:
        return tuple(
            Field(g, s * apply_coordinate(f, a).values - 1j * c * apply_gradient(f, a).values)
            for a in range(g.n)
        )
    if j == 2:
        return tuple(
            Field(g, c * apply_coordinate(f, a).values + 1j * s * apply_gradient(f, a).values)
            for a in range(g.n)
        )
    if j == 3:
        return tuple(
            Field(g, -1j * apply_gradient(f, a).values) for a in range(g.n, g.d)
        )
    if j == 4:
        return tuple(
            Field(g, apply_coordinate(f, a).values + 1j * t * apply_gradient(f, a).values)
            for a in range(g.n, g.d)
        )
    raise ValueError(f"vector field index must be in 0..4, got {j}")


def vector_field_norms(t: float, f: Field) -> tuple[float, float, float, float]:
    """(||A_1 u||, ..., ||A_4 u||), each summed over components in L2."""
    out = []
    for j in (1, 2, 3, 4):
        comps = apply_vector_field(j, t, f)
        out.append(math.sqrt(sum(c.mass() for c in comps)))
    return tuple(out)


def sigma_norm_parts(f: Field) -> tuple[float, float, float]:
    """(||x u||, ||y u||, ||grad u||) by quadrature."""
    g = f.grid
    x2 = sum(apply_coordinate(f, a).mass() for a in range(g.n))
    y2 = sum(apply_coordinate(f, a).mass() for a in range(g.n, g.d))
    grad2 = sum(apply_gradient(f, a).mass() for a in range(g.d))
    return math.sqrt(x2), math.sqrt(y2), math.sqrt(grad2)


def sigma_norm(f: Field) -> float:
    """||x u|| + ||y u|| + ||grad u||, the scattering-topology norm."""
    return sum(sigma_norm_parts(f))


def grad_y_norm(f: Field) -> float:
    g = f.grid
    return math.sqrt(sum(apply_gradient(f, a).mass() for a in range(g.n, g.d)))


def marginal_density(f: Field) -> MarginalDensity:
    """Integrate |u|^2 and Im(conj(u) grad_y u) over the confined axes."""
    g = f.grid
    wx = _confined_weights(g)
    conf = tuple(range(g.n))
    R = np.tensordot(wx, np.abs(f.values) ** 2, axes=(conf, conf))
    J = np.empty((g.free_dims,) + (g.free_points,) * g.free_dims)
    for i, ax in enumerate(range(g.n, g.d)):
        cur = np.imag(np.conj(f.values) * apply_gradient(f, ax).values)
        J[i] = np.tensordot(wx, cur, axes=(conf, conf))
    return MarginalDensity(0.0, g, R, J)


def virial_and_action(md: MarginalDensity) -> tuple[float, float]:
    """Virial I = 1/2 <R, |y-y'| * R> and Morawetz action
    M = <R', (y-y')/|y-y'| . J> for the weight a(z) = |y|.

    d-n = 1 uses cumulative sums (O(M)); d-n >= 2 uses a chunked
    pairwise reduction.
    """
    g = md.grid
    h = g.free_spacing
    f = g.free_dims
    if f == 1:
        y = g.free_coordinates()
        R, J = md.R, md.J_marg[0]
        cs = np.cumsum(R)
        cys = np.cumsum(R * y)
        # sum_{j<i} R_j (y_i - y_j), accumulated through cumulative sums
        below = np.concatenate(([0.0], cs[:-1]))
        below_y = np.concatenate(([0.0], cys[:-1]))
        I = float(h * h * np.sum(R * (y * below - below_y)))
        above = cs[-1] - cs
        M = float(h * h * np.sum(J * (below - above)))
        return I, M
    pts = np.stack(
        np.meshgrid(*([g.free_coordinates()] * f), indexing="ij"), axis=-1
    ).reshape(-1, f)
    R = md.R.ravel()
    J = md.J_marg.reshape(f, -1)
    I = 0.0
    M = 0.0
    chunk = max(1, 2**22 // max(len(R), 1))
    for lo in range(0, len(R), chunk):
        hi = min(lo + chunk, len(R))
        diff = pts[lo:hi, None, :] - pts[None, :, :]
        dist = np.sqrt(np.sum(diff**2, axis=-1))
        I += float(R[lo:hi] @ (dist @ R))
        with np.errstate(invalid="ignore", divide="ignore"):
            unit = np.where(dist[..., None] > 0.0, diff / dist[..., None], 0.0)
        # sum_{i,j} R_j unit(i,j) . J_i over the chunk rows i
        M += float(np.sum(np.einsum("ija,ai->ij", unit, J[:, lo:hi]) * R[None, :]))
    wI = h ** (2 * f)
    return 0.5 * wI * I, wI * M


def morawetz_seminorm(md: MarginalDensity) -> float:
    """|| |grad_y|^((3-(d-n))/2) R ||^2 via the Fourier multiplier route."""
    g = md.grid
    f = g.free_dims
    p = 0.5 * (3.0 - f)
    axes = tuple(range(f))
    Rhat = np.fft.fftn(md.R, axes=axes, norm="ortho")
    eta2 = np.zeros(())
    for _ in range(f):
        eta2 = np.add.outer(eta2, g.wavenumbers() ** 2)
    mult = eta2 ** p if p != 0.0 else np.ones_like(eta2)
    if p > 0:
        mult = np.where(eta2 > 0.0, eta2**p, 0.0)
    return float(np.sum(mult * np.abs(Rhat) ** 2) * g.free_spacing**f)


# proof-derived prefactors c_f with dM/dt >= c_f * seminorm, giving
# integral(seminorm) <= (2/c_f) mass^{3/2} sup ||grad_y u||:
# f=1: Delta|y| = 2 delta  -> c=1, C=2
# f=2: 1/|y| = 2 pi * kernel of (-Delta)^{-1/2}, times 1/2 -> c=pi, C=2/pi
# f=3: 2/|y| = 8 pi * kernel of (-Delta)^{-1},  times 1/2 -> c=4 pi, C=1/(2 pi)
MORAWETZ_BOUND_CONSTANT = {1: 2.0, 2: 2.0 / np.pi, 3: 1.0 / (2.0 * np.pi)}


@dataclass
class MorawetzReport:
    times: np.ndarray
    virial: np.ndarray
    action: np.ndarray
    seminorm: np.ndarray
    cumulative: np.ndarray
    mass: float
    sup_grad_y: float
    didt_residual: float
    action_bound_margin: float  # min over samples of bound - |M|
    bound_constant: float
    cumulative_bound: float
    verdicts: dict[str, bool] = field(default_factory=dict)


def morawetz_monitor(traj: TrajectoryHandle, didt_tol: float | None = None) -> MorawetzReport:
    """Check dI/dt = M by centered differences, |M| <= mass^{3/2}||grad_y u||
    per sample, and the cumulative seminorm bound (meaningful for lam > 0)."""
    ts = np.asarray(traj.times)
    if len(ts) < 3:
        raise ValueError("need at least three samples for centered differences")
    I = np.empty(len(ts))
    M = np.empty(len(ts))
    S = np.empty(len(ts))
    grad = np.empty(len(ts))
    for i, f in enumerate(traj.snapshots):
        md = marginal_density(f)
        I[i], M[i] = virial_and_action(md)
        S[i] = morawetz_seminorm(md)
        grad[i] = grad_y_norm(f)
    mass = traj.snapshots[0].mass()
    cumulative = np.concatenate(([0.0], np.cumsum(0.5 * (S[1:] + S[:-1]) * np.diff(ts))))
    didt = (I[2:] - I[:-2]) / (ts[2:] - ts[:-2])
    resid = float(np.max(np.abs(didt - M[1:-1]))) if len(ts) > 2 else 0.0
    bound_pt = mass**1.5 * grad
    margin = float(np.min(bound_pt - np.abs(M)))
    f = traj.grid.free_dims
    C = MORAWETZ_BOUND_CONSTANT[f]
    cum_bound = C * mass**1.5 * float(np.max(grad))
    if didt_tol is None:
        dt_s = float(np.median(np.diff(ts)))
        didt_tol = 50.0 * dt_s**2 * max(1.0, float(np.max(np.abs(M)))) + 1e-8
    report = MorawetzReport(
        times=ts,
        virial=I,
        action=M,
        seminorm=S,
        cumulative=cumulative,
        mass=mass,
        sup_grad_y=float(np.max(grad)),
        didt_residual=resid,
        action_bound_margin=margin,
        bound_constant=C,
        cumulative_bound=cum_bound,
    )
    report.verdicts = {
        "didt_equals_action": resid <= didt_tol,
        "action_pointwise_bound": margin >= -1e-10 * max(1.0, mass**1.5),
        "cumulative_bound": float(cumulative[-1]) <= cum_bound,
    }
    return report


def _is_admissible(k: int, q: float, r: float) -> bool:
    if r < 2:
        return False
    if k == 1 and not (2 <= r <= np.inf):
        return False
    if k == 2 and np.isinf(r):
        return False
    if k >= 3 and r >= 2 * k / (k - 2):
        return False
    lhs = 0.0 if np.isinf(q) else 2.0 / q
    rhs = k * (0.5 - (0.0 if np.isinf(r) else 1.0 / r))
    return abs(lhs - rhs) <= 1e-9


def strichartz_window_norm(traj: TrajectoryHandle, p: float, q: float, r: float) -> dict:
    """l^p over overlapping windows pi*[g-1, g+1) of L^q-in-time L^r-in-space.

    (q, r) must be d-admissible and (p, r) (d-n)-admissible. Returns the
    norm and its ratio to the initial L2 norm.
    """
    g = traj.grid
    if not _is_admissible(g.d, q, r):
        raise AdmissibilityError(f"(q={q}, r={r}) is not {g.d}-admissible")
    if not _is_admissible(g.free_dims, p, r):
        raise AdmissibilityError(f"(p={p}, r={r}) is not {g.free_dims}-admissible")
    ts = np.asarray(traj.times)
    norms = np.array([f.lp_norm(r) for f in traj.snapshots])
    gammas = range(int(np.floor(ts[0] / np.pi)), int(np.ceil(ts[-1] / np.pi)) + 1)
    window_vals = []
    for gam in gammas:
        lo, hi = np.pi * (gam - 1), np.pi * (gam + 1)
        mask = (ts >= lo) & (ts < hi)
        if not np.any(mask):
            continue
        if np.isinf(q):
            window_vals.append(float(np.max(norms[mask])))
            continue
        covered = lo >= ts[0] - 1e-12 and hi <= ts[-1] + 1e-12
        if covered and np.sum(mask) < 4:
            raise AdmissibilityError(
                "sampling stride too coarse for the in-window time integral"
            )
        if np.sum(mask) < 2:
            continue  # sliver of a partially covered window
        window_vals.append(
            float(np.trapezoid(norms[mask] ** q, ts[mask]) ** (1.0 / q))
        )
    wv = np.asarray(window_vals)
    total = float(np.max(wv)) if np.isinf(p) else float(np.sum(wv**p) ** (1.0 / p))
    u0_norm = traj.snapshots[0].norm()
    return {"norm": total, "ratio": total / u0_norm, "windows": len(wv)}


def decay_exponent_fit(
    traj: TrajectoryHandle, r: float, window: tuple[float, float]
) -> tuple[float, float]:
    """Least-squares slope of log ||u||_{L^r} against log t on the window.

    Returns (slope, rms residual).
    """
    T1, T2 = window
    if T1 < 1.0:
        raise ValueError("fit window must start at T1 >= 1")
    ts, ns = [], []
    for t, f in zip(traj.times, traj.snapshots):
        if T1 <= t <= T2:
            ts.append(t)
            ns.append(f.lp_norm(r))
    if len(ts) < 3:
        raise ValueError(f"too few samples in window [{T1}, {T2}]")
    lt, ln = np.log(np.asarray(ts)), np.log(np.asarray(ns))
    (slope, intercept), res = np.polyfit(lt, ln, 1), None
    resid = float(np.sqrt(np.mean((ln - (slope * lt + intercept)) ** 2)))
    return float(slope), resid


def diagnostics_record(
    t: float,
    f: Field,
    lam: float,
    sigma: float,
    probes=("mass", "energy"),
    lr_exponents=(),
    boundary_fraction: float | None = None,
) -> DiagnosticsRecord:
    """Evaluate the selected probes on one snapshot."""
    unknown = set(probes) - KNOWN_PROBES
    if unknown:
        raise ValueError(f"unknown probes: {sorted(unknown)}")
    mass, energy = conserved_quantities(f, lam, sigma)
    rec = DiagnosticsRecord(t=t, mass=mass)
    if "energy" in probes:
        rec.energy = energy
    if "sigma" in probes:
        rec.sigma_norm_parts = sigma_norm_parts(f)
    if "vector_fields" in probes:
        rec.vf_norms = vector_field_norms(t, f)
    if "morawetz" in probes:
        md = marginal_density(f)
        rec.virial_I, rec.action_M = virial_and_action(md)
        rec.morawetz_integrand = morawetz_seminorm(md)
        rec.cumulative_morawetz = 0.0  # accumulated by the caller
        rec.grad_y = grad_y_norm(f)
    if "lr_norms" in probes:
        rec.lr_norms = {float(r): f.lp_norm(float(r)) for r in lr_exponents}
    rec.boundary_mass_fraction = boundary_fraction
    return rec

"""Scenario configuration, orchestration and on-disk artifacts.

A scenario is a JSON document parsed strictly (unknown keys rejected).
Each run writes, under its output directory: diagnostics.csv with a
fixed column order, scattering.json when a scattering mode is selected,
raw little-endian complex64 snapshots with JSON sidecars, and
run_meta.json. Identical configs produce bit-identical diagnostics.csv.
"""

from __future__ import annotations

import argparse
import dataclasses
import glob as globmod
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError, TrapNLSError
from .grid import Field, GridSpec
from .solver import SimParams, TrajectoryHandle, run_simulation
from .scattering import (
    ScatteringReport,
    interaction_profile,
    long_range_probe,
    scattering_monitor,
    wave_operator_picard,
)

__all__ = ["ScenarioConfig", "parse_config", "serialize_config", "build_initial", "run_scenario", "main"]

SCATTERING_MODES = ("none", "monitor", "wave_operator", "long_range")
DATUM_KINDS = ("hermite_gaussian", "file")

BASE_COLUMNS = [
    "t",
    "mass",
    "energy",
    "sigma_x",
    "sigma_y",
    "sigma_grad",
    "vf_norm_1",
    "vf_norm_2",
    "vf_norm_3",
    "vf_norm_4",
    "virial_I",
    "action_M",
    "morawetz_integrand",
    "cumulative_morawetz",
    "grad_y",
    "boundary_mass_fraction",
]


@dataclass
class InitialDatum:
    """Tagged initial-condition choice.

    hermite_gaussian: product of Hermite functions psi_k on confined axes
    and Gaussians of the given width/center/momentum on free axes, scaled
    by amplitude. file: raw complex64 array matching the grid shape.
    """

    kind: str
    k: list[int] = field(default_factory=list)
    center: list[float] = field(default_factory=list)
    width: float = 1.0
    momentum: list[float] = field(default_factory=list)
    amplitude: float = 1.0
    path: str = ""


@dataclass
class ScatteringConfig:
    mode: str = "none"
    times: list[float] = field(default_factory=list)
    T: float = 40.0
    window: float = 2.0 * np.pi
    dt_quad: float | None = None


@dataclass
class ScenarioConfig:
    grid: GridSpec
    params: SimParams
    initial: InitialDatum
    probes: list[str] = field(default_factory=lambda: ["mass", "energy"])
    lr_exponents: list[float] = field(default_factory=list)
    scattering: ScatteringConfig = field(default_factory=ScatteringConfig)
    snapshot_times: list[float] = field(default_factory=list)
    output_dir: str = "out"
    seed: int = 0
    label: str = ""


def _section(doc: dict, name: str, cls, where: str) -> dict:
    sub = doc.get(name)
    if sub is None:
        raise ConfigError(f"missing required section '{name}'")
    if not isinstance(sub, dict):
        raise ConfigError(f"section '{name}' must be an object")
    allowed = {f.name for f in dataclasses.fields(cls)}
    for key in sub:
        if key not in allowed:
            raise ConfigError(f"unknown key '{key}' in section '{where}'")
    return sub


def parse_config(text: str) -> ScenarioConfig:
    """Strict JSON parsing; every unknown key is an error naming the key."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"syntax error at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("top-level config must be a JSON object")
    top_allowed = {f.name for f in dataclasses.fields(ScenarioConfig)}
    for key in doc:
        if key not in top_allowed:
            raise ConfigError(f"unknown key '{key}' at top level")

    try:
        grid = GridSpec(**_section(doc, "grid", GridSpec, "grid"))
        params = SimParams(**_section(doc, "params", SimParams, "params"))
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc

    init = InitialDatum(**_section(doc, "initial", InitialDatum, "initial"))
    if init.kind not in DATUM_KINDS:
        raise ConfigError(f"initial.kind must be one of {DATUM_KINDS}, got '{init.kind}'")
    if init.kind == "file" and not init.path:
        raise ConfigError("initial.kind 'file' requires initial.path")

    scat = ScatteringConfig()
    if "scattering" in doc:
        scat = ScatteringConfig(**_section(doc, "scattering", ScatteringConfig, "scattering"))
    if scat.mode not in SCATTERING_MODES:
        raise ConfigError(f"scattering.mode must be one of {SCATTERING_MODES}, got '{scat.mode}'")

    cfg = ScenarioConfig(
        grid=grid,
        params=params,
        initial=init,
        probes=list(doc.get("probes", ["mass", "energy"])),
        lr_exponents=[float(r) for r in doc.get("lr_exponents", [])],
        scattering=scat,
        snapshot_times=[float(t) for t in doc.get("snapshot_times", [])],
        output_dir=str(doc.get("output_dir", "out")),
        seed=int(doc.get("seed", 0)),
        label=str(doc.get("label", "")),
    )
    from .diagnostics import KNOWN_PROBES

    for p in cfg.probes:
        if p not in KNOWN_PROBES:
            raise ConfigError(f"unknown probe '{p}' (known: {sorted(KNOWN_PROBES)})")
    return cfg


def serialize_config(cfg: ScenarioConfig) -> str:
    """Canonical JSON form; parse(serialize(cfg)) reproduces cfg exactly."""
    doc = {
        "grid": dataclasses.asdict(cfg.grid),
        "params": dataclasses.asdict(cfg.params),
        "initial": dataclasses.asdict(cfg.initial),
        "probes": cfg.probes,
        "lr_exponents": cfg.lr_exponents,
        "scattering": dataclasses.asdict(cfg.scattering),
        "snapshot_times": cfg.snapshot_times,
        "output_dir": cfg.output_dir,
        "seed": cfg.seed,
        "label": cfg.label,
    }
    return json.dumps(doc, indent=2, sort_keys=True)


def build_initial(g: GridSpec, init: InitialDatum) -> Field:
    if init.kind == "file":
        raw = np.fromfile(init.path, dtype="<c8")
        expected = int(np.prod(g.shape))
        if raw.size != expected:
            raise ConfigError(
                f"datum file '{init.path}' has {raw.size} entries, grid needs {expected}"
            )
        return Field(g, raw.reshape(g.shape).astype(complex))
    k = list(init.k) or [0] * g.n
    center = list(init.center) or [0.0] * g.free_dims
    momentum = list(init.momentum) or [0.0] * g.free_dims
    if len(k) != g.n:
        raise ConfigError(f"initial.k needs {g.n} entries, got {len(k)}")
    if len(center) != g.free_dims or len(momentum) != g.free_dims:
        raise ConfigError(f"initial.center/momentum need {g.free_dims} entries")
    from .grid import hermite_basis

    vals = np.ones((), dtype=complex)
    basis = hermite_basis(g.hermite_order, g.hermite_nodes())
    for a in range(g.n):
        if not (0 <= k[a] < g.hermite_order):
            raise ConfigError(f"initial.k[{a}]={k[a]} outside [0, {g.hermite_order})")
        vals = np.multiply.outer(vals, basis[k[a]].astype(complex))
    y = g.free_coordinates()
    w = init.width
    if w <= 0:
        raise ConfigError("initial.width must be positive")
    norm1d = (np.pi * w**2) ** (-0.25)
    for a in range(g.free_dims):
        prof = norm1d * np.exp(-((y - center[a]) ** 2) / (2.0 * w**2) + 1j * momentum[a] * y)
        vals = np.multiply.outer(vals, prof)
    return Field(g, init.amplitude * vals.reshape(g.shape))


def _fmt(v) -> str:
    return "" if v is None else repr(float(v))


def write_diagnostics_csv(path: Path, traj: TrajectoryHandle, lr_exponents) -> None:
    cols = BASE_COLUMNS + [f"lr_{repr(float(r))}" for r in sorted(lr_exponents)]
    lines = [",".join(cols)]
    for rec in traj.records:
        sig = rec.sigma_norm_parts or (None, None, None)
        vf = rec.vf_norms or (None, None, None, None)
        row = [
            _fmt(rec.t),
            _fmt(rec.mass),
            _fmt(rec.energy),
            _fmt(sig[0]),
            _fmt(sig[1]),
            _fmt(sig[2]),
            _fmt(vf[0]),
            _fmt(vf[1]),
            _fmt(vf[2]),
            _fmt(vf[3]),
            _fmt(rec.virial_I),
            _fmt(rec.action_M),
            _fmt(rec.morawetz_integrand),
            _fmt(rec.cumulative_morawetz),
            _fmt(rec.grad_y),
            _fmt(rec.boundary_mass_fraction),
        ]
        row += [_fmt(rec.lr_norms.get(float(r))) for r in sorted(lr_exponents)]
        lines.append(",".join(row))
    path.write_text("\n".join(lines) + "\n")


def write_snapshot(dirpath: Path, index: int, t: float, f: Field) -> None:
    dirpath.mkdir(parents=True, exist_ok=True)
    stem = dirpath / f"snap_{index:05d}"
    f.values.astype("<c8").tofile(str(stem) + ".bin")
    sidecar = {
        "t": t,
        "dtype": "complex64",
        "byte_order": "little",
        "shape": list(f.grid.shape),
        "grid": dataclasses.asdict(f.grid),
    }
    (Path(str(stem) + ".json")).write_text(json.dumps(sidecar, indent=2, sort_keys=True))


def _report_to_doc(rep: ScatteringReport, outdir: Path) -> dict:
    doc = {}
    for fld in dataclasses.fields(rep):
        v = getattr(rep, fld.name)
        if fld.name == "u_plus":
            if v is not None:
                write_snapshot(outdir / "snapshots", 99999, float("nan"), v)
                doc["u_plus_path"] = "snapshots/snap_99999.bin"
            continue
        doc[fld.name] = v
    return doc


def run_scenario(cfg: ScenarioConfig, output_dir: str | None = None) -> int:
    """Execute one scenario; returns 0 on success, 1 on failure (with an
    error.json describing the failure)."""
    outdir = Path(output_dir or cfg.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    started = time.time()
    meta = {
        "config": json.loads(serialize_config(cfg)),
        "versions": {
            "python": sys.version.split()[0],
            "numpy": np.__version__,
            "trapnls": _package_version(),
        },
    }
    try:
        u0 = build_initial(cfg.grid, cfg.initial)
        traj = run_simulation(u0, cfg.params, probes=tuple(cfg.probes), lr_exponents=tuple(cfg.lr_exponents))
        write_diagnostics_csv(outdir / "diagnostics.csv", traj, cfg.lr_exponents)
        for i, t in enumerate(cfg.snapshot_times):
            ts, f = traj.field_at(float(t))
            write_snapshot(outdir / "snapshots", i, ts, f)
        if cfg.scattering.mode != "none":
            rep = _run_scattering(cfg, u0, traj)
            (outdir / "scattering.json").write_text(
                json.dumps(_report_to_doc(rep, outdir), indent=2, sort_keys=True)
            )
    except Exception as exc:  # encode any failure as machine-readable JSON
        (outdir / "error.json").write_text(
            json.dumps({"error": type(exc).__name__, "message": str(exc)}, indent=2)
        )
        meta["exit_status"] = 1
        meta["wall_time_s"] = time.time() - started
        (outdir / "run_meta.json").write_text(json.dumps(meta, indent=2, sort_keys=True))
        return 1
    meta["exit_status"] = 0
    meta["wall_time_s"] = time.time() - started
    (outdir / "run_meta.json").write_text(json.dumps(meta, indent=2, sort_keys=True))
    return 0


def _run_scattering(cfg: ScenarioConfig, u0: Field, traj: TrajectoryHandle) -> ScatteringReport:
    sc = cfg.scattering
    if sc.mode == "monitor":
        times = sc.times or [traj.times[-1] / 2**j for j in range(2, -1, -1)]
        return scattering_monitor(traj, times)
    if sc.mode == "wave_operator":
        _, rep = wave_operator_picard(u0, sc.T, sc.window, cfg.params, dt_quad=sc.dt_quad)
        return rep
    v_ref = interaction_profile(traj.snapshots[-1], traj.times[-1])
    return long_range_probe(traj, v_ref)


def _package_version() -> str:
    try:
        from importlib.metadata import version

        return version("trapnls")
    except Exception:
        return "unknown"


def _cmd_run(args) -> int:
    try:
        cfg = parse_config(Path(args.config).read_text())
    except (OSError, ConfigError) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}))
        return 1
    return run_scenario(cfg, output_dir=args.output_dir)


def _run_one(path_and_out):
    path, outdir = path_and_out
    try:
        cfg = parse_config(Path(path).read_text())
    except (OSError, ConfigError) as exc:
        return path, 1, str(exc)
    sub = Path(outdir or cfg.output_dir)
    if outdir:
        sub = Path(outdir) / Path(path).stem
    return path, run_scenario(cfg, output_dir=str(sub)), ""


def _cmd_sweep(args) -> int:
    paths = sorted(globmod.glob(args.configs))
    if not paths:
        print(json.dumps({"error": "ConfigError", "message": f"no configs match '{args.configs}'"}))
        return 1
    worst = 0
    jobs = [(p, args.output_dir) for p in paths]
    if args.threads > 1:
        with ProcessPoolExecutor(max_workers=args.threads) as pool:
            results = list(pool.map(_run_one, jobs))
    else:
        results = [_run_one(j) for j in jobs]
    for path, status, msg in results:
        print(f"{path}: {'ok' if status == 0 else 'FAILED ' + msg}")
        worst = max(worst, status)
    return worst


def _cmd_verify(args) -> int:
    from .catalog import run_catalog

    results = run_catalog(args.name, output_root=args.output_dir)
    worst = 0
    for r in results:
        print(r.summary_line())
        worst = max(worst, 0 if r.passed else 1)
    return worst


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="trapnls", description=__doc__)
    ap.add_argument("--threads", type=int, default=1, help="worker count for sweeps")
    ap.add_argument("--output-dir", default=None, help="override the config output directory")
    sub = ap.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="run one scenario config")
    p_run.add_argument("config")
    p_sweep = sub.add_parser("sweep", help="run every config matching a glob")
    p_sweep.add_argument("configs")
    p_verify = sub.add_parser("verify", help="run an acceptance scenario and print pass/fail")
    p_verify.add_argument("name", help="criterion name (c1..c13) or 'all'")
    args = ap.parse_args(argv)
    if args.command == "run":
        return _cmd_run(args)
    if args.command == "sweep":
        return _cmd_sweep(args)
    return _cmd_verify(args)


if __name__ == "__main__":
    sys.exit(main())

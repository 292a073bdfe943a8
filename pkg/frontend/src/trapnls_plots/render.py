"""Render figures from solver run artifacts.

Consumes only the documented on-disk formats (diagnostics.csv with its
fixed header, scattering.json) — never in-memory solver state. Output
is deterministic: fixed styles, no timestamps, identical bytes on
re-render.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

__all__ = ["FigureSpec", "SchemaError", "parse_figure_spec", "render"]

KINDS = ("decay", "conservation", "morawetz", "scattering", "phase_drift")

SPEC_KEYS = {
    "kind",
    "diagnostics_csv",
    "scattering_json",
    "output",
    "title",
    "xlabel",
    "ylabel",
    "column",
    "fit_start",
    "bound_constant",
}


class SchemaError(Exception):
    """Input file or figure spec does not match the documented schema."""


@dataclass
class FigureSpec:
    kind: str
    output: str
    diagnostics_csv: str | None = None
    scattering_json: str | None = None
    title: str = ""
    xlabel: str = ""
    ylabel: str = ""
    column: str = ""  # diagnostics column for decay figures
    fit_start: float = 5.0
    bound_constant: float = 2.0


def parse_figure_spec(text: str) -> FigureSpec:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"figure spec is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise SchemaError("figure spec must be a JSON object")
    unknown = set(doc) - SPEC_KEYS
    if unknown:
        raise SchemaError(f"unknown figure spec keys: {sorted(unknown)}")
    for key in ("kind", "output"):
        if key not in doc:
            raise SchemaError(f"figure spec is missing required key '{key}'")
    spec = FigureSpec(**doc)
    if spec.kind not in KINDS:
        raise SchemaError(f"kind must be one of {KINDS}, got '{spec.kind}'")
    needs_csv = spec.kind in ("decay", "conservation", "morawetz")
    if needs_csv and not spec.diagnostics_csv:
        raise SchemaError(f"kind '{spec.kind}' requires 'diagnostics_csv'")
    if not needs_csv and not spec.scattering_json:
        raise SchemaError(f"kind '{spec.kind}' requires 'scattering_json'")
    return spec


def load_diagnostics(path: str) -> dict[str, np.ndarray]:
    """Columns of a diagnostics.csv as float arrays (missing cells NaN)."""
    p = Path(path)
    if not p.exists():
        raise SchemaError(f"diagnostics file not found: {path}")
    with p.open(newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise SchemaError(f"empty diagnostics file: {path}")
        rows = list(reader)
    if not rows:
        raise SchemaError(f"diagnostics file has no data rows: {path}")
    out = {}
    for name in reader.fieldnames:
        out[name] = np.array(
            [float(r[name]) if r[name] not in ("", None) else math.nan for r in rows]
        )
    return out


def load_report(path: str) -> dict:
    p = Path(path)
    if not p.exists():
        raise SchemaError(f"report file not found: {path}")
    try:
        return json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise SchemaError(f"report is not valid JSON: {path}: {exc}") from exc


def _column(data: dict[str, np.ndarray], name: str, path: str) -> np.ndarray:
    if name not in data:
        raise SchemaError(f"missing column '{name}' in {path}")
    col = data[name]
    if np.all(np.isnan(col)):
        raise SchemaError(f"column '{name}' in {path} is entirely empty")
    return col


def _figure(spec: FigureSpec):
    fig, ax = plt.subplots(figsize=(6.4, 4.2), dpi=120)
    if spec.title:
        ax.set_title(spec.title)
    return fig, ax


def _save(fig, spec: FigureSpec) -> None:
    out = Path(spec.output)
    out.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out, metadata={"Software": "trapnls-plots"})
    plt.close(fig)


def _render_decay(spec: FigureSpec) -> None:
    data = load_diagnostics(spec.diagnostics_csv)
    t = _column(data, "t", spec.diagnostics_csv)
    name = spec.column or "lr_4.0"
    y = _column(data, name, spec.diagnostics_csv)
    mask = (t >= max(spec.fit_start, 1e-9)) & np.isfinite(y) & (y > 0)
    if np.sum(mask) < 3:
        raise SchemaError("too few positive samples beyond fit_start for a decay fit")
    slope, intercept = np.polyfit(np.log(t[mask]), np.log(y[mask]), 1)
    fig, ax = _figure(spec)
    ok = np.isfinite(y) & (y > 0) & (t > 0)
    ax.loglog(t[ok], y[ok], "o", ms=3, label=name)
    ax.loglog(t[mask], np.exp(intercept) * t[mask] ** slope, "-", lw=1,
              label=f"fit slope {slope:.3f}")
    ax.set_xlabel(spec.xlabel or "t")
    ax.set_ylabel(spec.ylabel or name)
    ax.legend()
    _save(fig, spec)


def _render_conservation(spec: FigureSpec) -> None:
    data = load_diagnostics(spec.diagnostics_csv)
    t = _column(data, "t", spec.diagnostics_csv)
    mass = _column(data, "mass", spec.diagnostics_csv)
    fig, ax = _figure(spec)
    drift = np.abs(mass - mass[0]) / abs(mass[0])
    ax.semilogy(t, np.maximum(drift, 1e-18), label=f"mass drift (max {np.max(drift):.2e})")
    energy = data.get("energy")
    if energy is not None and not np.all(np.isnan(energy)):
        ed = np.abs(energy - energy[0]) / abs(energy[0])
        ax.semilogy(t, np.maximum(ed, 1e-18), label=f"energy drift (max {np.nanmax(ed):.2e})")
    ax.set_xlabel(spec.xlabel or "t")
    ax.set_ylabel(spec.ylabel or "relative drift")
    ax.legend()
    _save(fig, spec)


def _render_morawetz(spec: FigureSpec) -> None:
    data = load_diagnostics(spec.diagnostics_csv)
    t = _column(data, "t", spec.diagnostics_csv)
    integrand = _column(data, "morawetz_integrand", spec.diagnostics_csv)
    cumulative = _column(data, "cumulative_morawetz", spec.diagnostics_csv)
    mass = _column(data, "mass", spec.diagnostics_csv)
    grad = _column(data, "grad_y", spec.diagnostics_csv)
    bound = spec.bound_constant * float(np.nanmax(mass)) ** 1.5 * float(np.nanmax(grad))
    final = float(cumulative[np.isfinite(cumulative)][-1])
    margin = bound - final
    fig, ax = _figure(spec)
    ax.plot(t, integrand, label="smoothing integrand")
    ax.plot(t, cumulative, label="cumulative")
    ax.axhline(bound, ls="--", lw=1, color="k",
               label=f"bound {bound:.3e} (margin {margin:.3e})")
    ax.set_xlabel(spec.xlabel or "t")
    ax.set_ylabel(spec.ylabel or "marginal smoothing")
    ax.legend()
    _save(fig, spec)


def _render_scattering(spec: FigureSpec) -> None:
    rep = load_report(spec.scattering_json)
    for key in ("times", "sigma_diffs", "verdict"):
        if key not in rep:
            raise SchemaError(f"missing key '{key}' in {spec.scattering_json}")
    times, diffs = rep["times"], rep["sigma_diffs"]
    if not diffs:
        raise SchemaError(f"empty Cauchy-difference series in {spec.scattering_json}")
    fig, ax = _figure(spec)
    ax.semilogy(times[-len(diffs):], diffs, "o-", label="profile Cauchy difference")
    if rep.get("l2_diffs"):
        ax.semilogy(times[-len(rep["l2_diffs"]):], rep["l2_diffs"], "s--", label="L2 difference")
    ax.annotate(f"verdict: {rep['verdict']}", xy=(0.02, 0.05), xycoords="axes fraction")
    ax.set_xlabel(spec.xlabel or "t")
    ax.set_ylabel(spec.ylabel or "difference norm")
    ax.legend()
    _save(fig, spec)


def _render_phase_drift(spec: FigureSpec) -> None:
    rep = load_report(spec.scattering_json)
    for key in ("phase_times", "phase_drift"):
        if key not in rep:
            raise SchemaError(f"missing key '{key}' in {spec.scattering_json}")
    t = np.asarray(rep["phase_times"], dtype=float)
    theta = np.asarray(rep["phase_drift"], dtype=float)
    if t.size == 0:
        raise SchemaError(f"empty phase series in {spec.scattering_json}")
    fig, ax = _figure(spec)
    pos = t > 0
    ax.semilogx(t[pos], theta[pos], "o-", ms=3, label="phase drift")
    coef = rep.get("phase_fit_coefficient")
    if coef is None and np.sum(t >= 1.0) >= 3:
        coef = float(np.polyfit(np.log(t[t >= 1.0]), theta[t >= 1.0], 1)[0])
    if coef is not None:
        ax.annotate(f"slope vs log t: {coef:.4f}", xy=(0.02, 0.92), xycoords="axes fraction")
    ax.set_xlabel(spec.xlabel or "t (log scale)")
    ax.set_ylabel(spec.ylabel or "accumulated phase")
    ax.legend()
    _save(fig, spec)


RENDERERS = {
    "decay": _render_decay,
    "conservation": _render_conservation,
    "morawetz": _render_morawetz,
    "scattering": _render_scattering,
    "phase_drift": _render_phase_drift,
}


def render(spec: FigureSpec) -> str:
    """Render one figure; returns the output path."""
    RENDERERS[spec.kind](spec)
    return spec.output

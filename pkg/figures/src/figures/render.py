"""Rendering routines, one per figure kind."""

from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from figures.spec import FigureSpec
from figures.table import Table, TableError, optional_column, read_table, require_columns


def _grid_from_snapshot(table: Table) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Reshape an (x1, x2, h) row listing back into square arrays."""
    rows = table.data.shape[0]
    n = int(round(math.sqrt(rows)))
    if n * n != rows:
        raise TableError(f"{table.path}: {rows} rows do not form a square grid")
    x1 = table.col("x1").reshape(n, n)
    x2 = table.col("x2").reshape(n, n)
    h = table.col("h").reshape(n, n)
    if not (np.all(np.diff(x1[:, 0]) > 0) and np.all(np.diff(x2[0, :]) > 0)):
        raise TableError(f"{table.path}: rows are not in x1-major grid order")
    return x1, x2, h


def _with_ramp(x1, x2, h, spec: FigureSpec) -> np.ndarray:
    if spec.mean_slope is None:
        return h
    b1, b2 = spec.mean_slope
    return h + b1 * x1 + b2 * x2


def _decorate(ax, spec: FigureSpec) -> None:
    if spec.title:
        ax.set_title(spec.title)
    if spec.xlabel:
        ax.set_xlabel(spec.xlabel)
    if spec.ylabel:
        ax.set_ylabel(spec.ylabel)
    if spec.xlim:
        ax.set_xlim(*spec.xlim)
    if spec.ylim:
        ax.set_ylim(*spec.ylim)


def _render_height_surface(table: Table, spec: FigureSpec) -> plt.Figure:
    require_columns(table, ("x1", "x2", "h"), spec.kind)
    x1, x2, h = _grid_from_snapshot(table)
    h = _with_ramp(x1, x2, h, spec)
    fig = plt.figure(figsize=(7, 5.5))
    ax = fig.add_subplot(projection="3d")
    ax.plot_surface(x1, x2, h, cmap="viridis", rcount=100, ccount=100, linewidth=0)
    ax.set_zlabel("h")
    _decorate(ax, spec)
    return fig


def _render_contour_steps(table: Table, spec: FigureSpec) -> plt.Figure:
    require_columns(table, ("x1", "x2", "h"), spec.kind)
    x1, x2, h = _grid_from_snapshot(table)
    h = _with_ramp(x1, x2, h, spec)
    # step edges: contours of h at integer multiples of the step height
    a = spec.step_height
    lo = math.floor(h.min() / a)
    hi = math.ceil(h.max() / a)
    levels = a * np.arange(lo, hi + 1)
    levels = levels[(levels > h.min()) & (levels < h.max())]
    if levels.size == 0:
        raise TableError(
            f"{table.path}: no contour levels; step_height {a} exceeds the "
            f"height range [{h.min():.3g}, {h.max():.3g}]"
        )
    fig, ax = plt.subplots(figsize=(6, 6))
    ax.contour(x1, x2, h, levels=levels, colors="k", linewidths=0.9)
    ax.set_aspect("equal")
    _decorate(ax, spec)
    return fig


def _render_density_surface(table: Table, spec: FigureSpec) -> plt.Figure:
    require_columns(table, ("p_mag", "phi", "psi"), spec.kind)
    r = table.col("p_mag")
    phi = table.col("phi")
    p1, p2 = r * np.cos(phi), r * np.sin(phi)
    psi = table.col("psi")
    psi0 = optional_column(table, "psi0")
    fig = plt.figure(figsize=(10 if psi0 is not None else 7, 5.5))
    panels = 2 if psi0 is not None else 1
    for i, (vals, label) in enumerate(
        [(psi, "regularized")] + ([(psi0, "original")] if psi0 is not None else [])
    ):
        ax = fig.add_subplot(1, panels, i + 1, projection="3d")
        ax.plot_trisurf(p1, p2, vals, cmap="cividis", linewidth=0)
        ax.set_xlabel("p1")
        ax.set_ylabel("p2")
        ax.set_title(label)
    if spec.title:
        fig.suptitle(spec.title)
    return fig


def _render_transition_curves(table: Table, spec: FigureSpec) -> plt.Figure:
    require_columns(table, ("E21_density", "E11_density"), spec.kind)
    x_name = table.columns[0]
    if x_name in ("E21_density", "E11_density", "diff"):
        raise TableError(
            f"{table.path}: first column should be the swept parameter, "
            f"got '{x_name}'"
        )
    x = table.col(x_name)
    e21 = table.col("E21_density")
    e11 = table.col("E11_density")
    diff = optional_column(table, "diff")
    if diff is None:
        diff = e21 - e11
    fig, ax = plt.subplots(figsize=(6.5, 4.5))
    ax.semilogx(x, e21, "o-", ms=3, label="meander (2+1)")
    ax.semilogx(x, e11, "s-", ms=3, label="bunch (1+1)")
    # mark parameter values where the preferred morphology flips
    sign_flip = np.nonzero(np.diff(np.sign(diff)) != 0)[0]
    for i in sign_flip:
        t = diff[i] / (diff[i] - diff[i + 1])
        xc = x[i] * (x[i + 1] / x[i]) ** t
        ax.axvline(xc, color="0.5", ls="--", lw=0.8)
    ax.set_xlabel(spec.xlabel or x_name)
    ax.set_ylabel(spec.ylabel or "energy density")
    ax.legend()
    if spec.title:
        ax.set_title(spec.title)
    if spec.xlim:
        ax.set_xlim(*spec.xlim)
    if spec.ylim:
        ax.set_ylim(*spec.ylim)
    return fig


def _render_scaling_fit(table: Table, spec: FigureSpec) -> plt.Figure:
    require_columns(table, ("a", "E_min"), spec.kind)
    a = table.col("a")
    e = table.col("E_min")
    if np.any(e >= 0):
        raise TableError(f"{table.path}: E_min must be negative for a log-log fit")
    optional_column(table, "A_used")
    loga, loge = np.log(a), np.log(-e)
    slope, intercept = np.polyfit(loga, loge, 1)
    fig, ax = plt.subplots(figsize=(6, 4.5))
    ax.loglog(a, -e, "o", ms=4, label="minimized energy")
    ax.loglog(a, np.exp(intercept) * a**slope, "-", lw=1, label=f"fit slope {slope:.3f}")
    ax.set_xlabel(spec.xlabel or "a")
    ax.set_ylabel(spec.ylabel or "-E_min")
    ax.legend()
    if spec.title:
        ax.set_title(spec.title)
    return fig


KINDS = {
    "height-surface": _render_height_surface,
    "contour-steps": _render_contour_steps,
    "density-surface": _render_density_surface,
    "transition-curves": _render_transition_curves,
    "scaling-fit": _render_scaling_fit,
}


def render(spec: FigureSpec) -> None:
    """Render one figure to spec.output; raises before any file is written."""
    try:
        renderer = KINDS[spec.kind]
    except KeyError:
        raise TableError(
            f"unknown figure kind '{spec.kind}'; known kinds: {sorted(KINDS)}"
        ) from None
    table = read_table(spec.input)
    fig = renderer(table, spec)
    try:
        fig.savefig(spec.output, dpi=spec.dpi, bbox_inches="tight")
    finally:
        plt.close(fig)

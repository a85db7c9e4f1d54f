"""Deterministic matplotlib rendering of the simulator's CSV tables."""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .spec import FigureSpec, SpecError, orbit_colors  # noqa: E402

# Fixed style so reruns are byte-identical.
STYLE = {
    "font.family": "DejaVu Sans",
    "font.size": 10,
    "figure.dpi": 100,
    "savefig.dpi": 100,
    "figure.figsize": (5.0, 3.6),
    "axes.linewidth": 0.8,
    "svg.hashsalt": "figplots",
}


def _read_rows(path: Path):
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise SpecError(f"cannot read {path}: {exc}") from exc
    rows = [r for r in rows if r]
    if len(rows) < 2:
        raise SpecError(f"{path} has no data rows")
    return rows


def _column(rows, idx):
    out = []
    for r in rows[1:]:
        cell = r[idx].strip()
        out.append(np.nan if cell == "" else float(cell))
    return np.asarray(out)


def _single_input(spec: FigureSpec) -> Path:
    return next(iter(spec.inputs.values()))


def _finish(fig, ax, spec: FigureSpec, out_path):
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
    fig.tight_layout()
    fig.savefig(out_path, format="png", metadata={"Software": "figplots"})
    plt.close(fig)


def _render_trajectory(spec, out_path):
    rows = _read_rows(_single_input(spec))
    header = rows[0]
    if header[0] != "t":
        raise SpecError("trajectory CSV must start with a 't' column")
    t = _column(rows, 0)
    orbit_cols = [(i, name[2:]) for i, name in enumerate(header) if name.startswith("p_")]
    if not orbit_cols:
        raise SpecError("trajectory CSV has no p_<orbit> columns")
    colors = orbit_colors([lab for _, lab in orbit_cols])
    colors.update(spec.colors)
    fig, ax = plt.subplots()
    for i, lab in orbit_cols:
        ax.plot(t, _column(rows, i), color=colors[lab], lw=1.4, label="{" + lab + "}")
    ax.set_xlabel(spec.xlabel or "t")
    ax.set_ylabel(spec.ylabel or "probability")
    ax.legend(frameon=False, fontsize=8)
    _finish(fig, ax, spec, out_path)


def _render_spectrum(spec, out_path):
    rows = _read_rows(_single_input(spec))
    header = rows[0]
    fig, ax = plt.subplots()
    if header[:2] == ["index", "energy"]:
        # endpoint spectrum: dots, symmetric states colored by dominant orbit
        idx = _column(rows, 0)
        energy = _column(rows, 1)
        sym = _column(rows, 2).astype(bool)
        orbits = [r[3].strip() for r in rows[1:]]
        colors = orbit_colors(sorted({o for o in orbits if o}))
        colors.update(spec.colors)
        ax.plot(idx[~sym], energy[~sym], "o", color="0.6", ms=4, label="non-symmetric")
        seen = set()
        for i, e, s, orb in zip(idx, energy, sym, orbits):
            if not s:
                continue
            c = colors.get(orb, "red")
            lab = ("{" + orb + "}") if orb and orb not in seen else None
            seen.add(orb)
            ax.plot([i], [e], "o", color=c, ms=6, label=lab)
        ax.set_xlabel(spec.xlabel or "state index")
        ax.legend(frameon=False, fontsize=8)
    elif header[0] == "r" and any(h.startswith("e_") for h in header):
        # spectrum along a sweep path: one line per level vs r
        r = _column(rows, 0)
        for i, name in enumerate(header):
            if name.startswith("e_"):
                ax.plot(r, _column(rows, i), color="black", lw=0.9)
        ax.set_xlabel(spec.xlabel or "r")
    else:
        raise SpecError("unrecognized spectrum CSV header")
    ax.set_ylabel(spec.ylabel or "energy")
    _finish(fig, ax, spec, out_path)


def _load_field(path: Path):
    """(x, y, values) from either matrix ('y\\x' corner) or long 3-column CSV."""
    rows = _read_rows(path)
    header = rows[0]
    if header[0].startswith("y\\") or header[0].startswith("y/"):
        x = np.array([float(v) for v in header[1:]])
        y = np.array([float(r[0]) for r in rows[1:]])
        vals = np.array([[np.nan if c.strip() == "" else float(c) for c in r[1:]] for r in rows[1:]])
        return x, y, vals
    if len(header) >= 3:
        a = _column(rows, 0)
        b = _column(rows, 1)
        v = _column(rows, 2)
        x = np.unique(a)
        y = np.unique(b)
        vals = np.full((len(y), len(x)), np.nan)
        xi = {val: i for i, val in enumerate(x)}
        yi = {val: i for i, val in enumerate(y)}
        for aa, bb, vv in zip(a, b, v):
            vals[yi[bb], xi[aa]] = vv
        return x, y, vals
    raise SpecError(f"{path}: expected a matrix or 3+ column CSV")


def _render_heatmap(spec, out_path):
    x, y, vals = _load_field(_single_input(spec))
    fig, ax = plt.subplots()
    cmap = spec.options.get("cmap", "RdBu_r")
    if spec.options.get("symmetric", True):
        vmax = float(np.nanmax(np.abs(vals))) or 1.0
        mesh = ax.pcolormesh(x, y, vals, cmap=cmap, vmin=-vmax, vmax=vmax, shading="nearest")
    else:
        mesh = ax.pcolormesh(x, y, vals, cmap=cmap, shading="nearest")
    fig.colorbar(mesh, ax=ax)
    ax.set_aspect(spec.options.get("aspect", "auto"))
    _finish(fig, ax, spec, out_path)


def _render_signmap(spec, out_path):
    rows = _read_rows(_single_input(spec))
    header = rows[0]
    if "sign" not in header:
        raise SpecError("signmap requires a CSV with a 'sign' column")
    si = header.index("sign")
    a = _column(rows, 0)
    b = _column(rows, 1)
    s = _column(rows, si)
    x = np.unique(a)
    y = np.unique(b)
    grid = np.zeros((len(y), len(x)))
    xi = {val: i for i, val in enumerate(x)}
    yi = {val: i for i, val in enumerate(y)}
    for aa, bb, ss in zip(a, b, s):
        grid[yi[bb], xi[aa]] = ss
    fig, ax = plt.subplots()
    mesh = ax.pcolormesh(x, y, grid, cmap="coolwarm", vmin=-1, vmax=1, shading="nearest")
    fig.colorbar(mesh, ax=ax, ticks=[-1, 0, 1])
    ax.set_xlabel(spec.xlabel or header[0])
    ax.set_ylabel(spec.ylabel or header[1])
    _finish(fig, ax, spec, out_path)


def _render_surface(spec, out_path):
    x, y, vals = _load_field(_single_input(spec))
    fig, ax = plt.subplots()
    levels = int(spec.options.get("levels", 25))
    cf = ax.contourf(x, y, vals, levels=levels, cmap=spec.options.get("cmap", "viridis"))
    ax.contour(x, y, vals, levels=levels, colors="black", linewidths=0.3)
    fig.colorbar(cf, ax=ax)
    ax.set_aspect("equal")
    _finish(fig, ax, spec, out_path)


_RENDERERS = {
    "trajectory": _render_trajectory,
    "spectrum": _render_spectrum,
    "heatmap": _render_heatmap,
    "signmap": _render_signmap,
    "surface": _render_surface,
}


def render(spec: FigureSpec, out_path) -> Path:
    """Render one figure; raises SpecError on bad inputs, writes nothing then."""
    out_path = Path(out_path)
    with matplotlib.rc_context(STYLE):
        _RENDERERS[spec.kind](spec, out_path)
    return out_path

"""Figure rendering from simulation CSV outputs.

Styling follows the source convention of the overlay figures: particle
(Monte Carlo) series are drawn as colored solid lines, continuum series as
black dashed lines.  Output format follows the file extension; vector (SVG)
is the default in the CLI examples.  Rendering is deterministic: the SVG
hash salt is pinned and date metadata is suppressed, so re-rendering from
identical inputs reproduces identical bytes.
"""

from __future__ import annotations

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "plotkit"

import matplotlib.pyplot as plt
import numpy as np

from .specfile import PlotSpec, SpecError, read_csv_columns

__all__ = ["plot_profiles", "plot_diagram", "plot_surface_with_inset"]

_MC_COLORS = ["#d62728", "#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]


def _save(fig, output: Path) -> Path:
    output = Path(output)
    output.parent.mkdir(parents=True, exist_ok=True)
    metadata = {"Date": None} if output.suffix == ".svg" else None
    fig.savefig(output, metadata=metadata)
    plt.close(fig)
    return output


def plot_profiles(spec: PlotSpec) -> Path:
    """Overlay 1D profiles; optionally on the rescaled x/sqrt(beta) axis."""
    if not spec.series:
        raise SpecError("profiles plot needs at least one series")
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    mc_count = 0
    for s in spec.series:
        cols = read_csv_columns(s.csv)
        if "x" not in cols or spec.column not in cols:
            raise SpecError(f"{s.csv}: expected columns 'x' and {spec.column!r}")
        x = cols["x"]
        y = cols[spec.column]
        if spec.axis == "rescaled":
            x = x / math.sqrt(s.beta)
        if s.kind == "mc":
            ax.plot(x, y, color=_MC_COLORS[mc_count % len(_MC_COLORS)],
                    lw=1.6, label=s.label)
            mc_count += 1
        else:
            ax.plot(x, y, color="black", ls="--", lw=1.2, label=s.label)
    for xm in spec.markers:
        ax.annotate("", xy=(xm, 0.0), xytext=(xm, -0.06),
                    xycoords=("data", "axes fraction"),
                    textcoords=("data", "axes fraction"),
                    arrowprops=dict(arrowstyle="-|>", color="black"))
    ax.set_xlabel("x / sqrt(beta)" if spec.axis == "rescaled" else "x")
    ax.set_ylabel(spec.column)
    ax.legend(frameon=False, fontsize=9)
    fig.tight_layout()
    return _save(fig, spec.output)


def plot_diagram(spec: PlotSpec) -> Path:
    """Bimodality diagram: center curvatures vs the swept parameter."""
    if spec.table is None:
        raise SpecError("diagram plot needs a table=... input")
    cols = read_csv_columns(spec.table)
    for need in ("param", "rho_dd", "rho_g_dd", "source"):
        if need not in cols:
            raise SpecError(f"{spec.table}: missing column {need!r}")
    if len(cols["param"]) == 0:
        raise SpecError(f"{spec.table}: table is empty")

    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    sources = sorted(set(cols["source"]), key=str)
    styles = {
        "MC": dict(marker="o", ls="-", color="#d62728"),
        "ExKS": dict(marker="s", ls="--", color="black", mfc="none"),
    }
    for src in sources:
        mask = np.array([s == src for s in cols["source"]])
        order = np.argsort(cols["param"][mask].astype(float))
        x = cols["param"][mask].astype(float)[order]
        st = styles.get(str(src), dict(marker="^", ls=":", color="gray"))
        ax.plot(x, cols["rho_dd"][mask][order], label=f"{src}: total", **st)
        st2 = dict(st)
        st2["mfc"] = "none" if st.get("mfc") != "none" else st.get("color")
        ax.plot(x, cols["rho_g_dd"][mask][order], alpha=0.55,
                label=f"{src}: tumbling", **st2)
    ax.axhline(0.0, color="gray", lw=0.8)
    ax.set_xlabel("swept parameter")
    ax.set_ylabel("center second derivative")
    ax.legend(frameon=False, fontsize=9)
    fig.tight_layout()
    return _save(fig, spec.output)


def plot_surface_with_inset(spec: PlotSpec) -> Path:
    """Heat map of a 2D field with an inset line plot of one lattice slice."""
    if spec.surface_csv is None:
        raise SpecError("surface plot needs a csv=... input")
    if spec.slice_value is None:
        raise SpecError("surface plot needs slice_value=...")
    cols = read_csv_columns(spec.surface_csv)
    for need in ("x1", "x2", spec.column):
        if need not in cols:
            raise SpecError(f"{spec.surface_csv}: missing column {need!r}")
    x1 = np.unique(cols["x1"])
    x2 = np.unique(cols["x2"])
    n1, n2 = len(x1), len(x2)
    if n1 * n2 != len(cols["x1"]):
        raise SpecError(f"{spec.surface_csv}: not a full row-major lattice")
    field = cols[spec.column].reshape(n1, n2)

    axis_coords = x1 if spec.slice_axis == 0 else x2
    dx = axis_coords[1] - axis_coords[0]
    lo = axis_coords - 0.5 * dx
    hit = np.where((lo <= spec.slice_value) & (spec.slice_value < lo + dx))[0]
    if hit.size == 0:
        raise SpecError(
            f"slice_value {spec.slice_value} is off-lattice "
            f"(cells span [{lo[0]}, {lo[-1] + dx}))"
        )
    i = int(hit[0])
    line = field[i, :] if spec.slice_axis == 0 else field[:, i]
    along = x2 if spec.slice_axis == 0 else x1

    fig, ax = plt.subplots(figsize=(5.6, 5.0))
    mesh = ax.pcolormesh(x1, x2, field.T, shading="nearest", cmap="viridis")
    fig.colorbar(mesh, ax=ax, label=spec.column)
    if spec.slice_axis == 0:
        ax.axvline(x1[i], color="black", lw=1.0)
    else:
        ax.axhline(x2[i], color="black", lw=1.0)
    ax.set_xlabel("x1")
    ax.set_ylabel("x2")

    inset = ax.inset_axes([0.58, 0.62, 0.38, 0.33])
    inset.plot(along, line, color="black", lw=1.2)
    inset.tick_params(labelsize=7)
    inset.patch.set_alpha(0.85)
    fig.tight_layout()
    return _save(fig, spec.output)

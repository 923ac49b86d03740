"""Figure-level observables: curvature at the attractant peak, bimodality
sweeps, rescaled-axis collapse, 2D slices, and run-length estimates.

The bimodality indicator is the four-cell second-difference of the
cell-averaged density across the domain center,

    rho'' = (rho[I/2+1] - rho[I/2] - rho[I/2-1] + rho[I/2-2]) / (2 dx^2),

which is exact for quadratics in cell-averaged form; a positive value flags
a central dip (bimodal aggregation).  The normalization carries a factor
1/(2 dx^2): the two inner differences straddle the center two cells apart,
so dividing by dx^2 alone would double the curvature estimate.  Signs, which
all bimodality logic relies on, are unaffected by the normalization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import ConfigError
from .model import ModelParams
from .profiles import GridProfile

__all__ = [
    "BimodalityPoint",
    "center_second_derivative",
    "estimate_run_length",
    "bimodality_sweep",
    "rescale_collapse",
    "slice_2d",
    "diffusion_layer_marker",
    "block_bootstrap_dd",
]


def center_second_derivative(rho: np.ndarray, dx: float) -> float:
    """Second derivative of a cell-averaged profile at the domain center.

    Requires an even cell count so the center is a cell face; cells are
    indexed from the lower domain edge.  Translation-invariant: constants and
    linear ramps map to zero.
    """
    rho = np.asarray(rho, dtype=float)
    n = rho.shape[0]
    if n < 4:
        raise ConfigError(f"need at least 4 cells, got {n}")
    if n % 2 != 0:
        raise ConfigError(f"cell count must be even, got {n}")
    i = n // 2
    return float((rho[i + 1] - rho[i] - rho[i - 1] + rho[i - 2]) / (2.0 * dx * dx))


def estimate_run_length(ensemble, n_cells: int, params: ModelParams):
    """Instantaneous (xi_plus, xi_minus, xi_bar) profiles of an ensemble.

    Running particles contribute ``eps / Lambda(y)``, classified by the sign
    of ``v . grad S`` at their position; particles at the gradient-free point
    are excluded from the signed classes.  Empty classes yield NaN, never 0.
    """
    from .mc import bin_profile

    prof = bin_profile(ensemble, n_cells, params)
    return prof.xi_plus, prof.xi_minus, prof.xi_bar


@dataclass(frozen=True)
class BimodalityPoint:
    """One point of a bimodality diagram."""

    param_name: str  # "tau" or "nu"
    param_value: float
    rho_dd: float
    rho_g_dd: float
    source: str  # "MC" or "ExKS"

    @property
    def bimodal(self) -> bool:
        return self.rho_dd > 0.0


def bimodality_sweep(
    base: ModelParams,
    param_name: str,
    values: Sequence[float],
    engines: Iterable[str] = ("ExKS",),
    exks_grid=None,
    mc_config_builder=None,
) -> list[BimodalityPoint]:
    """Center curvatures of rho and rho_g swept over tau or nu.

    For the extended solver the swept adaptation time maps to
    ``beta = eps * tau``.  MC points need a config builder
    ``params -> McConfig`` supplying the run sizing.  Points are emitted in
    (value, engine) order, deterministically.
    """
    from dataclasses import replace as _replace

    if param_name not in ("tau", "nu"):
        raise ConfigError(f"param_name must be 'tau' or 'nu', got {param_name!r}")
    engines = [e for e in engines]
    for e in engines:
        if e not in ("MC", "ExKS"):
            raise ConfigError(f"unknown engine {e!r}")
    if "MC" in engines and mc_config_builder is None:
        raise ConfigError("MC engine requested without an mc_config_builder")

    from .continuum import GridSpec, exks_density, exks_solve, exks_split_densities
    from .mc import run as mc_run

    if exks_grid is None:
        exks_grid = GridSpec()

    points: list[BimodalityPoint] = []
    for value in values:
        params = _replace(base, **{param_name: float(value)})
        for engine in engines:
            if engine == "ExKS":
                beta = params.epsilon * params.tau
                state = exks_solve(params, beta, exks_grid)
                rho = exks_density(state)
                _, rho_g = exks_split_densities(state, params)
                dx = exks_grid.dx(params.domain_length)
            else:
                config = mc_config_builder(params)
                profile, _ = mc_run(config)
                rho = profile.rho
                rho_g = profile.rho_g
                dx = profile.dx
            points.append(
                BimodalityPoint(
                    param_name=param_name,
                    param_value=float(value),
                    rho_dd=center_second_derivative(rho, dx),
                    rho_g_dd=center_second_derivative(rho_g, dx),
                    source=engine,
                )
            )
    return points


def rescale_collapse(
    profiles: Sequence[tuple[float, np.ndarray, np.ndarray]],
    normalization: str = "peak",
    seam_margin_layers: float = 1.0,
) -> float:
    """Max pairwise L-inf distance between profiles on the x/sqrt(beta) axis.

    ``profiles`` is a sequence of ``(beta, x_centers, rho)``.  Each profile is
    normalized (``"peak"`` to unit maximum, ``"mass"`` to unit mean) and
    interpolated piecewise-linearly onto the rescaled axis of the first
    profile, restricted to the common support.

    The underlying scaling property is exact only where the log-attractant is
    linear; the kink at the periodic seam does not rescale with
    x -> x/sqrt(beta), so each profile's seam diffusion layer, of thickness
    ``sqrt(eps * tau) = sqrt(beta)``, is excluded from the comparison window
    (``seam_margin_layers`` layer thicknesses per profile; 0 disables).
    """
    if len(profiles) == 0:
        raise ConfigError("rescale_collapse needs at least one profile")
    if normalization not in ("peak", "mass"):
        raise ConfigError(f"normalization must be 'peak' or 'mass', got {normalization!r}")

    rescaled = []
    lo, hi = -math.inf, math.inf
    for beta, x, rho in profiles:
        if beta <= 0.0:
            raise ConfigError(f"beta must be > 0, got {beta}")
        x = np.asarray(x, dtype=float)
        rho = np.asarray(rho, dtype=float)
        s = math.sqrt(beta)
        u = x / s
        norm = rho.max() if normalization == "peak" else rho.mean()
        if norm <= 0.0:
            raise ConfigError("profile normalization is nonpositive")
        margin = seam_margin_layers * s  # in physical x of this profile
        keep_lo = (x.min() + margin) / s
        keep_hi = (x.max() - margin) / s
        lo = max(lo, keep_lo)
        hi = min(hi, keep_hi)
        rescaled.append((u, rho / norm))
    if not (hi > lo):
        raise ConfigError("rescaled supports do not overlap")

    u0, f0 = rescaled[0]
    grid = u0[(u0 >= lo) & (u0 <= hi)]
    if grid.size < 2:
        raise ConfigError("overlap window contains fewer than 2 sample points")
    interped = [np.interp(grid, u, f) for u, f in rescaled]
    worst = 0.0
    for i in range(len(interped)):
        for j in range(i + 1, len(interped)):
            worst = max(worst, float(np.max(np.abs(interped[i] - interped[j]))))
    return worst


@dataclass
class ProfileSlice:
    """One lattice line of a 2D profile."""

    coord: np.ndarray
    rho: np.ndarray
    rho_f: np.ndarray
    rho_g: np.ndarray
    xi_bar: np.ndarray | None


def slice_2d(profile: GridProfile, value: float, axis: int = 0) -> ProfileSlice:
    """Extract the row/column of cells along an intersection of a 2D lattice.

    ``axis`` is the coordinate held fixed at ``value`` (0 = x1, returning a
    profile along x2).  The value must lie inside the domain; it selects the
    half-open cell row containing it, so a value exactly on a lattice line
    selects the upper row.
    """
    if profile.dim != 2:
        raise ConfigError("slice_2d needs a 2D profile")
    L = profile.domain_length
    if not (-0.5 * L <= value < 0.5 * L):
        raise ConfigError(f"slice value {value} outside the domain [-L/2, L/2)")
    i = int((value + 0.5 * L) / L * profile.n_cells)
    i = min(i, profile.n_cells - 1)
    sel = (i, slice(None)) if axis == 0 else (slice(None), i)
    return ProfileSlice(
        coord=profile.x,
        rho=profile.rho[sel],
        rho_f=profile.rho_f[sel],
        rho_g=profile.rho_g[sel],
        xi_bar=None if profile.xi_bar is None else profile.xi_bar[sel],
    )


def diffusion_layer_marker(epsilon: float, tau: float) -> float:
    """Thickness sqrt(eps * tau) of the diffusion layer set up within the
    adaptation time (the nondimensional diffusion constant is eps)."""
    if epsilon < 0.0 or tau < 0.0:
        raise ConfigError("epsilon and tau must be nonnegative")
    return math.sqrt(epsilon * tau)


def block_bootstrap_dd(
    rho_snapshots: np.ndarray,
    dx: float,
    n_boot: int = 400,
    block_len: int | None = None,
    seed: int = 12345,
) -> float:
    """Bootstrap standard error of the center curvature of a time average.

    Resamples whole blocks of consecutive snapshots (moving-block bootstrap)
    to respect temporal correlation, recomputes the time-averaged profile and
    its center second derivative per replicate, and returns the standard
    deviation over replicates.
    """
    snaps = np.asarray(rho_snapshots, dtype=float)
    n = snaps.shape[0]
    if n < 4:
        raise ConfigError(f"need at least 4 snapshots, got {n}")
    if block_len is None:
        block_len = max(1, n // 25)
    n_blocks = max(1, n // block_len)
    rng = np.random.default_rng(seed)
    reps = np.empty(n_boot)
    for b in range(n_boot):
        starts = rng.integers(0, n - block_len + 1, size=n_blocks)
        idx = (starts[:, None] + np.arange(block_len)[None, :]).ravel()
        mean_rho = snaps[idx].mean(axis=0)
        reps[b] = center_second_derivative(mean_rho, dx)
    return float(reps.std(ddof=1))

"""Binned per-cell observables shared by the particle engine and diagnostics.

A :class:`GridProfile` holds cell-averaged densities on the periodic domain,
split into running and tumbling subpopulations, together with the local mean
run-length estimates.  Cells are half-open, ``[lo, hi)``, indexed from the
lower domain edge; a 2D profile is indexed ``[i1, i2]`` row-major.

Missing run-length values (no contributing particles in a cell) are stored as
NaN and serialized as ``NA``, never as zero.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = ["GridProfile", "cell_centers"]


def cell_centers(domain_length: float, n_cells: int) -> np.ndarray:
    """Centers of ``n_cells`` half-open cells covering [-L/2, L/2)."""
    dx = domain_length / n_cells
    return (np.arange(n_cells) - n_cells / 2 + 0.5) * dx


@dataclass
class GridProfile:
    """Cell-averaged densities and run-length observables.

    ``rho == rho_f + rho_g`` cellwise by construction.  ``xi_bar`` follows the
    half-sum convention ``(xi_plus + xi_minus) / 2`` wherever both classes are
    populated; cells with only one populated class fall back to the pooled
    per-particle mean of the available samples.
    """

    dim: int
    domain_length: float
    n_cells: int
    rho: np.ndarray
    rho_f: np.ndarray
    rho_g: np.ndarray
    xi_plus: np.ndarray | None = None
    xi_minus: np.ndarray | None = None
    xi_bar: np.ndarray | None = None
    n_snapshots: int = 1
    window: float = 0.0
    rho_snapshots: np.ndarray | None = field(default=None, repr=False)

    @property
    def dx(self) -> float:
        return self.domain_length / self.n_cells

    @property
    def x(self) -> np.ndarray:
        """Cell centers along one axis."""
        return cell_centers(self.domain_length, self.n_cells)

    def total_mass(self) -> float:
        """Integral of rho over the domain; equals L**dim for counting output."""
        return float(np.sum(self.rho) * self.dx**self.dim)

    @staticmethod
    def from_accumulators(
        dim: int,
        domain_length: float,
        n_cells: int,
        counts_f: np.ndarray,
        counts_g: np.ndarray,
        xi_sums: np.ndarray,
        xi_counts: np.ndarray,
        n_snapshots: int,
        window: float,
        n_particles: int,
        rho_snapshots: np.ndarray | None = None,
    ) -> "GridProfile":
        """Normalize raw per-cell accumulators into a profile.

        ``counts_*`` are particle tallies summed over snapshots; ``xi_sums``
        and ``xi_counts`` carry the climbing / descending / gradient-free
        classes in their leading axis (order: plus, minus, axis).
        """
        nbar = n_particles / n_cells**dim
        norm = 1.0 / (nbar * n_snapshots)
        rho_f = counts_f * norm
        rho_g = counts_g * norm
        rho = rho_f + rho_g

        s_plus, s_minus, s_axis = xi_sums
        n_plus, n_minus, n_axis = xi_counts
        with np.errstate(invalid="ignore", divide="ignore"):
            xi_plus = np.where(n_plus > 0, s_plus / np.maximum(n_plus, 1), np.nan)
            xi_minus = np.where(n_minus > 0, s_minus / np.maximum(n_minus, 1), np.nan)
            both = (n_plus > 0) & (n_minus > 0)
            pooled_n = n_plus + n_minus + n_axis
            pooled = np.where(
                pooled_n > 0,
                (s_plus + s_minus + s_axis) / np.maximum(pooled_n, 1),
                np.nan,
            )
            xi_bar = np.where(both, 0.5 * (xi_plus + xi_minus), pooled)

        return GridProfile(
            dim=dim,
            domain_length=domain_length,
            n_cells=n_cells,
            rho=rho,
            rho_f=rho_f,
            rho_g=rho_g,
            xi_plus=xi_plus,
            xi_minus=xi_minus,
            xi_bar=xi_bar,
            n_snapshots=n_snapshots,
            window=window,
            rho_snapshots=rho_snapshots,
        )

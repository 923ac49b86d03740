"""Execute resolved configurations and persist outputs with manifests."""

from __future__ import annotations

import hashlib
import time
from pathlib import Path

import numpy as np

from .config import ResolvedConfig, parse_config
from .continuum import (
    exks_density,
    exks_run_length,
    exks_solve,
    exks_split_densities,
    ks_solve,
    ks_split_densities,
)
from .csvio import write_field_csv, write_profile_csv
from .manifest import build_manifest, write_manifest
from .mc import run as mc_run
from .profiles import GridProfile, cell_centers

__all__ = ["run_dir_name", "execute_config", "execute_config_text"]


def run_dir_name(cfg: ResolvedConfig) -> str:
    """Timestamped, digest-suffixed directory name for one run."""
    digest = hashlib.sha256(cfg.config_text().encode()).hexdigest()[:8]
    stamp = time.strftime("%Y%m%dT%H%M%SZ", time.gmtime())
    return f"{cfg.engine}-{stamp}-{digest}"


def _solver_profile(cfg: ResolvedConfig, rho, rho_f, rho_g, xi_bar=None) -> GridProfile:
    n = len(rho)
    nan = np.full(n, np.nan)
    return GridProfile(
        dim=1,
        domain_length=cfg.params.domain_length,
        n_cells=n,
        rho=np.asarray(rho),
        rho_f=np.asarray(rho_f),
        rho_g=np.asarray(rho_g),
        xi_plus=nan,
        xi_minus=nan.copy(),
        xi_bar=nan.copy() if xi_bar is None else np.asarray(xi_bar),
    )


def execute_config(cfg: ResolvedConfig, out_dir: Path) -> Path:
    """Run one engine configuration, writing CSV outputs and a manifest.

    Partial outputs are removed if the run fails.  Returns the manifest path.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    t0 = time.perf_counter()
    try:
        outputs = []
        if cfg.engine == "mc":
            profile, record = mc_run(cfg.mc)
            rec = write_profile_csv(out_dir / "profile.csv", profile)
            written.append(out_dir / "profile.csv")
            outputs.append(rec)
            run_info = {
                "n_steps": record.n_steps,
                "n_snapshots": record.n_snapshots,
                "wall_seconds": round(record.wall_seconds, 3),
            }
        elif cfg.engine == "ks":
            state = ks_solve(cfg.params, cfg.ks_alpha, cfg.grid)
            rho_f, rho_g = ks_split_densities(state, cfg.params)
            profile = _solver_profile(cfg, state.rho, rho_f, rho_g)
            rec = write_profile_csv(out_dir / "profile.csv", profile)
            written.append(out_dir / "profile.csv")
            outputs.append(rec)
            run_info = {
                "dt": state.dt,
                "t": state.t,
                "residual": state.residual,
                "wall_seconds": round(time.perf_counter() - t0, 3),
            }
        else:
            state = exks_solve(cfg.params, cfg.exks_beta, cfg.grid)
            rho = exks_density(state)
            rho_f, rho_g = exks_split_densities(state, cfg.params)
            xi_bar = exks_run_length(state, cfg.params)
            profile = _solver_profile(cfg, rho, rho_f, rho_g, xi_bar)
            rec = write_profile_csv(out_dir / "profile.csv", profile)
            written.append(out_dir / "profile.csv")
            outputs.append(rec)
            op_x = cell_centers(cfg.params.domain_length, cfg.grid.n_x)
            m = -cfg.grid.m_halfwidth + (np.arange(cfg.grid.n_m) + 0.5) * cfg.grid.dm
            rec = write_field_csv(out_dir / "field.csv", op_x, m, state.h)
            written.append(out_dir / "field.csv")
            outputs.append(rec)
            run_info = {
                "dt": state.dt,
                "t": state.t,
                "residual": state.residual,
                "wall_seconds": round(time.perf_counter() - t0, 3),
            }
        manifest = build_manifest(cfg.resolved, run_info, outputs)
        return write_manifest(out_dir / "manifest.json", manifest)
    except Exception:
        for p in written:
            p.unlink(missing_ok=True)
        raise


def execute_config_text(text: str, out_dir: Path) -> Path:
    return execute_config(parse_config(text), out_dir)

"""Flat key=value run configuration: parsing, defaults, validation.

A configuration is a whitespace/newline-separated list of ``key=value``
tokens with ``#`` comments.  Unknown keys are errors, as are missing
required keys.  All defaults are materialized at parse time so the resolved
mapping embedded in the run manifest reproduces the run exactly.

Example::

    engine=mc dim=1 epsilon=0.1 scaling=large beta=1
    nu=0.3 delta=1.25 chi=0.7 L=10 seed=42
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .continuum import GridSpec
from .errors import ConfigError
from .mc import McConfig
from .model import ModelParams, ScalingMode

__all__ = ["ResolvedConfig", "parse_config", "desk_mc_defaults"]

_COMMON_KEYS = {
    "engine", "dim", "epsilon", "scaling", "tau", "alpha", "beta",
    "nu", "delta", "chi", "allow_chi_zero", "L", "seed",
}
_MC_KEYS = {"n_particles", "n_cells", "dt", "t_end", "avg_window", "snapshot_stride"}
_KS_KEYS = {"n_cells", "dt", "t_end"}
_EXKS_KEYS = {"n_cells", "n_m", "m_halfwidth", "dt", "t_end"}

_ENGINES = ("mc", "ks", "exks")


@dataclass
class ResolvedConfig:
    """A fully materialized run configuration."""

    engine: str
    params: ModelParams
    scaling: ScalingMode | None
    mc: McConfig | None = None
    grid: GridSpec | None = None
    ks_alpha: float | None = None
    exks_beta: float | None = None
    resolved: dict[str, str] = field(default_factory=dict)

    def config_text(self) -> str:
        """Canonical one-key-per-line rendering of the resolved mapping."""
        return "\n".join(f"{k}={v}" for k, v in sorted(self.resolved.items())) + "\n"


def _tokenize(text: str) -> dict[str, str]:
    out: dict[str, str] = {}
    for raw_line in text.splitlines():
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        for token in line.split():
            if "=" not in token:
                raise ConfigError(f"malformed token {token!r}; expected key=value")
            key, value = token.split("=", 1)
            if not key or not value:
                raise ConfigError(f"malformed token {token!r}; expected key=value")
            if key in out:
                raise ConfigError(f"duplicate key {key!r}")
            out[key] = value
    return out


def _get_float(kv: dict[str, str], key: str, default: float | None = None) -> float:
    if key not in kv:
        if default is None:
            raise ConfigError(f"missing required key {key!r}")
        return default
    try:
        return float(kv[key])
    except ValueError as exc:
        raise ConfigError(f"key {key!r}: {kv[key]!r} is not a number") from exc


def _get_int(kv: dict[str, str], key: str, default: int | None = None) -> int:
    if key not in kv:
        if default is None:
            raise ConfigError(f"missing required key {key!r}")
        return default
    try:
        return int(kv[key])
    except ValueError as exc:
        raise ConfigError(f"key {key!r}: {kv[key]!r} is not an integer") from exc


def _get_bool(kv: dict[str, str], key: str, default: bool = False) -> bool:
    if key not in kv:
        return default
    v = kv[key].lower()
    if v in ("true", "1", "yes"):
        return True
    if v in ("false", "0", "no"):
        return False
    raise ConfigError(f"key {key!r}: {kv[key]!r} is not a boolean")


def desk_mc_defaults(dim: int, epsilon: float, L: float) -> dict[str, float]:
    """Desk-scale Monte Carlo sizing: reduced particle count and horizon.

    The full-scale reference is N=720000 (1D) with dt=2e-4 and a 2 L^2/eps
    horizon; desk scale targets minutes per run with per-cell statistical
    error of a few percent.
    """
    diff_time = L * L / epsilon
    return {
        "n_particles": 100_000 if dim == 1 else 1_000_000,
        "n_cells": 100 if dim == 1 else 50,
        "dt": 1e-3 if dim == 1 else 2e-3,
        "t_end": 0.5 * diff_time,
        "avg_window": 0.1 * diff_time,
    }


def parse_config(text: str) -> ResolvedConfig:
    """Parse and fully resolve a flat key=value configuration document."""
    kv = _tokenize(text)

    engine = kv.get("engine")
    if engine is None:
        raise ConfigError("missing required key 'engine'")
    if engine not in _ENGINES:
        raise ConfigError(f"engine must be one of {_ENGINES}, got {engine!r}")

    allowed = set(_COMMON_KEYS)
    allowed |= {"mc": _MC_KEYS, "ks": _KS_KEYS, "exks": _EXKS_KEYS}[engine]
    unknown = sorted(set(kv) - allowed)
    if unknown:
        raise ConfigError(f"unknown key(s) for engine {engine}: {', '.join(unknown)}")

    dim = _get_int(kv, "dim", 1)
    if engine in ("ks", "exks") and dim != 1:
        raise ConfigError(f"engine {engine} is one-dimensional; dim must be 1")
    epsilon = _get_float(kv, "epsilon")
    nu = _get_float(kv, "nu")
    delta = _get_float(kv, "delta")
    chi = _get_float(kv, "chi")
    if chi == 0.0 and not _get_bool(kv, "allow_chi_zero"):
        raise ConfigError("chi=0 requires allow_chi_zero=true (no-chemotaxis control)")
    L = _get_float(kv, "L", 10.0)
    seed = _get_int(kv, "seed", 0)

    scaling_kind = kv.get("scaling", "direct")
    ks_alpha = None
    exks_beta = None
    scaling: ScalingMode | None
    if engine == "ks":
        if scaling_kind != "small":
            raise ConfigError("engine ks requires scaling=small (alpha)")
        if kv.get("alpha", "").lower() in ("inf", "infinity"):
            ks_alpha = math.inf
            scaling = None
            tau = 1.0  # placeholder; the KS solver depends on alpha only
        else:
            ks_alpha = _get_float(kv, "alpha")
            scaling = ScalingMode.small_adaptation(ks_alpha)
            tau = scaling.resolve(epsilon)
    elif engine == "exks":
        if scaling_kind != "large":
            raise ConfigError("engine exks requires scaling=large (beta)")
        exks_beta = _get_float(kv, "beta")
        scaling = ScalingMode.large_adaptation(exks_beta)
        tau = scaling.resolve(epsilon)
    else:
        if scaling_kind == "direct":
            scaling = ScalingMode.direct(_get_float(kv, "tau"))
        elif scaling_kind == "small":
            scaling = ScalingMode.small_adaptation(_get_float(kv, "alpha"))
        elif scaling_kind == "large":
            scaling = ScalingMode.large_adaptation(_get_float(kv, "beta"))
        else:
            raise ConfigError(f"unknown scaling {scaling_kind!r}")
        for key, kind in (("tau", "direct"), ("alpha", "small"), ("beta", "large")):
            if key in kv and scaling_kind != kind:
                raise ConfigError(f"key {key!r} conflicts with scaling={scaling_kind}")
        tau = scaling.resolve(epsilon)

    params = ModelParams(
        epsilon=epsilon, tau=tau, nu=nu, delta=delta, chi=chi,
        domain_length=L, dim=dim,
    )

    resolved: dict[str, str] = {
        "engine": engine,
        "dim": str(dim),
        "epsilon": repr(epsilon),
        "nu": repr(nu),
        "delta": repr(delta),
        "chi": repr(chi),
        "L": repr(L),
        "seed": str(seed),
        "tau": repr(tau),
        "mu_hat": repr(params.mu_hat) if nu > 0 else "inf",
        "scaling": scaling_kind,
    }
    if chi == 0.0:
        resolved["allow_chi_zero"] = "true"
    if ks_alpha is not None:
        resolved["alpha"] = "inf" if math.isinf(ks_alpha) else repr(ks_alpha)
    if exks_beta is not None:
        resolved["beta"] = repr(exks_beta)
    if engine == "mc" and scaling is not None:
        resolved[{"direct": "tau", "small": "alpha", "large": "beta"}[scaling.kind]] = repr(
            scaling.value
        )

    cfg = ResolvedConfig(
        engine=engine, params=params, scaling=scaling,
        ks_alpha=ks_alpha, exks_beta=exks_beta, resolved=resolved,
    )

    if engine == "mc":
        d = desk_mc_defaults(dim, epsilon, L)
        n_cells = _get_int(kv, "n_cells", int(d["n_cells"]))
        n_req = _get_int(kv, "n_particles", int(d["n_particles"]))
        cell_count = n_cells**dim
        n_actual = ((n_req + cell_count - 1) // cell_count) * cell_count
        cfg.mc = McConfig(
            params=params,
            n_particles=n_actual,
            n_cells=n_cells,
            dt=_get_float(kv, "dt", d["dt"]),
            t_end=_get_float(kv, "t_end", d["t_end"]),
            avg_window=_get_float(kv, "avg_window", d["avg_window"]),
            snapshot_stride=_get_int(kv, "snapshot_stride", 100),
            seed=seed,
        )
        resolved.update(
            n_particles=str(n_actual),
            n_particles_requested=str(n_req),
            n_cells=str(n_cells),
            dt=repr(cfg.mc.dt),
            t_end=repr(cfg.mc.t_end),
            avg_window=repr(cfg.mc.avg_window),
            snapshot_stride=str(cfg.mc.snapshot_stride),
        )
    elif engine == "ks":
        grid = GridSpec(
            n_x=_get_int(kv, "n_cells", 100),
            dt=_get_float(kv, "dt", -1.0) if "dt" in kv else None,
            t_end=_get_float(kv, "t_end", 60.0),
        )
        cfg.grid = grid
        resolved.update(n_cells=str(grid.n_x), t_end=repr(grid.t_end))
        if grid.dt is not None:
            resolved["dt"] = repr(grid.dt)
    else:
        grid = GridSpec(
            n_x=_get_int(kv, "n_cells", 100),
            n_m=_get_int(kv, "n_m", 200),
            m_halfwidth=_get_float(kv, "m_halfwidth", 5.0),
            dt=_get_float(kv, "dt", -1.0) if "dt" in kv else None,
            t_end=_get_float(kv, "t_end", 25.0),
        )
        cfg.grid = grid
        resolved.update(
            n_cells=str(grid.n_x), n_m=str(grid.n_m),
            m_halfwidth=repr(grid.m_halfwidth), t_end=repr(grid.t_end),
        )
        if grid.dt is not None:
            resolved["dt"] = repr(grid.dt)
    return cfg

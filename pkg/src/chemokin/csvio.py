"""CSV serialization of profiles and diagnostic tables.

Schemas (header row, one data row per cell, full double precision):

* 1D profile: ``x,rho,rho_f,rho_g,xi_plus,xi_minus,xi_bar``
* 2D profile: ``x1,x2,rho,rho_f,rho_g,xi_bar`` (row-major over x1, x2)
* internal-state field: ``x,m,h``
* bimodality table: ``param,rho_dd,rho_g_dd,source``

Missing values (empty run-length classes) are written as ``NA``, never 0.
"""

from __future__ import annotations

import csv
import hashlib
import io
import math
from pathlib import Path

import numpy as np

from .diagnostics import BimodalityPoint
from .errors import ConfigError
from .profiles import GridProfile

__all__ = [
    "format_value",
    "write_profile_csv",
    "write_field_csv",
    "write_bimodality_csv",
    "read_profile_csv",
    "read_bimodality_csv",
    "sha256_file",
]


def format_value(v: float) -> str:
    """Full-precision decimal rendering; NaN maps to the NA token."""
    if v is None or (isinstance(v, float) and math.isnan(v)):
        return "NA"
    return f"{v:.17g}"


def _write(path: Path, text: str) -> dict:
    data = text.encode("utf-8")
    path.write_bytes(data)
    return {
        "name": path.name,
        "sha256": hashlib.sha256(data).hexdigest(),
        "bytes": len(data),
    }


def write_profile_csv(path, profile: GridProfile) -> dict:
    """Write a profile in the 1D or 2D schema; returns a digest record."""
    path = Path(path)
    buf = io.StringIO()
    if profile.dim == 1:
        buf.write("x,rho,rho_f,rho_g,xi_plus,xi_minus,xi_bar\n")
        x = profile.x
        nanrow = np.full(profile.n_cells, np.nan)
        xp = profile.xi_plus if profile.xi_plus is not None else nanrow
        xm = profile.xi_minus if profile.xi_minus is not None else nanrow
        xb = profile.xi_bar if profile.xi_bar is not None else nanrow
        for i in range(profile.n_cells):
            buf.write(
                ",".join(
                    format_value(v)
                    for v in (
                        x[i], profile.rho[i], profile.rho_f[i], profile.rho_g[i],
                        xp[i], xm[i], xb[i],
                    )
                )
                + "\n"
            )
    else:
        buf.write("x1,x2,rho,rho_f,rho_g,xi_bar\n")
        x = profile.x
        xb = profile.xi_bar
        for i1 in range(profile.n_cells):
            for i2 in range(profile.n_cells):
                vals = (
                    x[i1], x[i2],
                    profile.rho[i1, i2], profile.rho_f[i1, i2], profile.rho_g[i1, i2],
                    np.nan if xb is None else xb[i1, i2],
                )
                buf.write(",".join(format_value(v) for v in vals) + "\n")
    return _write(path, buf.getvalue())


def write_field_csv(path, x: np.ndarray, m: np.ndarray, h: np.ndarray) -> dict:
    """Write a full internal-state field h(x, m), row-major over x then m."""
    path = Path(path)
    buf = io.StringIO()
    buf.write("x,m,h\n")
    for i in range(len(x)):
        for k in range(len(m)):
            buf.write(f"{format_value(x[i])},{format_value(m[k])},{format_value(h[i, k])}\n")
    return _write(path, buf.getvalue())


def write_bimodality_csv(path, points: list[BimodalityPoint]) -> dict:
    path = Path(path)
    buf = io.StringIO()
    buf.write("param,rho_dd,rho_g_dd,source\n")
    for pt in points:
        buf.write(
            f"{format_value(pt.param_value)},{format_value(pt.rho_dd)},"
            f"{format_value(pt.rho_g_dd)},{pt.source}\n"
        )
    return _write(path, buf.getvalue())


def _parse(tok: str) -> float:
    return math.nan if tok == "NA" else float(tok)


def read_profile_csv(path) -> dict[str, np.ndarray]:
    """Read either profile schema back into column arrays."""
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        cols: dict[str, list[float]] = {name: [] for name in header}
        for row in reader:
            if len(row) != len(header):
                raise ConfigError(f"{path}: row width {len(row)} != header width {len(header)}")
            for name, tok in zip(header, row):
                cols[name].append(_parse(tok))
    return {name: np.asarray(vals) for name, vals in cols.items()}


def read_bimodality_csv(path) -> list[BimodalityPoint]:
    path = Path(path)
    points = []
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != ["param", "rho_dd", "rho_g_dd", "source"]:
            raise ConfigError(f"{path}: unexpected header {header}")
        for row in reader:
            points.append(
                BimodalityPoint(
                    param_name="param",
                    param_value=_parse(row[0]),
                    rho_dd=_parse(row[1]),
                    rho_g_dd=_parse(row[2]),
                    source=row[3],
                )
            )
    return points


def sha256_file(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def profile_from_columns(cols: dict[str, np.ndarray]) -> GridProfile:
    """Rebuild a 1D GridProfile from parsed CSV columns (diag subcommands)."""
    if "x" not in cols:
        raise ConfigError("profile CSV lacks an 'x' column")
    x = cols["x"]
    n = len(x)
    if n < 2:
        raise ConfigError("profile CSV has fewer than 2 rows")
    dx = float(x[1] - x[0])
    L = dx * n
    return GridProfile(
        dim=1,
        domain_length=L,
        n_cells=n,
        rho=cols["rho"],
        rho_f=cols.get("rho_f", np.full(n, np.nan)),
        rho_g=cols.get("rho_g", np.full(n, np.nan)),
        xi_plus=cols.get("xi_plus"),
        xi_minus=cols.get("xi_minus"),
        xi_bar=cols.get("xi_bar"),
    )

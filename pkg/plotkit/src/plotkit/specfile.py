"""Plot specifications and CSV input parsing.

A plot spec is the same flat ``key=value`` document the simulation configs
use (whitespace-separated tokens, ``#`` comments).  Series are numbered::

    output=overlay.svg
    axis=plain                  # or: rescaled (requires per-series beta)
    column=rho
    series.1.csv=mc_beta1.csv   series.1.label="MC beta=1"   series.1.kind=mc
    series.2.csv=exks_beta1.csv series.2.label="ExKS beta=1" series.2.kind=continuum

plotkit reads only the public CSV schemas of the simulation suite:
1D profiles (``x,rho,rho_f,rho_g,xi_plus,xi_minus,xi_bar``), 2D profiles
(``x1,x2,rho,rho_f,rho_g,xi_bar``), and bimodality tables
(``param,rho_dd,rho_g_dd,source``).  Missing values are the ``NA`` token.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

__all__ = ["SpecError", "PlotSpec", "Series", "parse_spec_file", "read_csv_columns"]


class SpecError(ValueError):
    """Malformed spec or input not matching the expected CSV schema."""


@dataclass
class Series:
    csv: Path
    label: str
    kind: str = "mc"  # mc -> solid, continuum -> dashed
    beta: float | None = None


@dataclass
class PlotSpec:
    output: Path
    axis: str = "plain"
    column: str = "rho"
    series: list[Series] = field(default_factory=list)
    table: Path | None = None
    surface_csv: Path | None = None
    slice_value: float | None = None
    slice_axis: int = 0
    markers: list[float] = field(default_factory=list)


def _tokenize(text: str) -> dict[str, str]:
    out: dict[str, str] = {}
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        for token in line.split():
            if "=" not in token:
                raise SpecError(f"malformed token {token!r}; expected key=value")
            key, value = token.split("=", 1)
            if not key or not value:
                raise SpecError(f"malformed token {token!r}")
            if key in out:
                raise SpecError(f"duplicate key {key!r}")
            out[key] = value
    return out


def parse_spec_file(path) -> PlotSpec:
    return parse_spec(Path(path).read_text(), base=Path(path).parent)


def parse_spec(text: str, base: Path | None = None) -> PlotSpec:
    kv = _tokenize(text)
    base = base or Path(".")

    def resolve(p: str) -> Path:
        q = Path(p)
        return q if q.is_absolute() else base / q

    if "output" not in kv:
        raise SpecError("missing required key 'output'")
    spec = PlotSpec(
        output=resolve(kv.pop("output")),
        axis=kv.pop("axis", "plain"),
        column=kv.pop("column", "rho"),
    )
    if spec.axis not in ("plain", "rescaled"):
        raise SpecError(f"axis must be plain or rescaled, got {spec.axis!r}")
    if "table" in kv:
        spec.table = resolve(kv.pop("table"))
    if "csv" in kv:
        spec.surface_csv = resolve(kv.pop("csv"))
    if "slice_value" in kv:
        spec.slice_value = float(kv.pop("slice_value"))
    if "slice_axis" in kv:
        spec.slice_axis = int(kv.pop("slice_axis"))
    if "markers" in kv:
        spec.markers = [float(tok) for tok in kv.pop("markers").split(",")]

    indices = sorted(
        {int(k.split(".")[1]) for k in kv if k.startswith("series.")}
    )
    for i in indices:
        prefix = f"series.{i}."
        fields = {k[len(prefix):]: v for k, v in kv.items() if k.startswith(prefix)}
        for k in list(kv):
            if k.startswith(prefix):
                kv.pop(k)
        if "csv" not in fields:
            raise SpecError(f"series {i} lacks a csv path")
        kind = fields.get("kind", "mc")
        if kind not in ("mc", "continuum"):
            raise SpecError(f"series {i}: kind must be mc or continuum")
        spec.series.append(
            Series(
                csv=resolve(fields["csv"]),
                label=fields.get("label", f"series {i}").replace("_", " "),
                kind=kind,
                beta=float(fields["beta"]) if "beta" in fields else None,
            )
        )
    if kv:
        raise SpecError(f"unknown key(s): {', '.join(sorted(kv))}")
    if spec.axis == "rescaled":
        for s in spec.series:
            if s.beta is None:
                raise SpecError(f"rescaled axis requires beta for series {s.label!r}")
    return spec


def read_csv_columns(path) -> dict[str, np.ndarray]:
    path = Path(path)
    if not path.exists():
        raise SpecError(f"input CSV not found: {path}")
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SpecError(f"{path}: empty file") from None
        cols: dict[str, list] = {name: [] for name in header}
        for row in reader:
            if len(row) != len(header):
                raise SpecError(f"{path}: ragged row (schema mismatch)")
            for name, tok in zip(header, row):
                cols[name].append(math.nan if tok == "NA" else _maybe_float(tok))
    return {k: np.asarray(v) for k, v in cols.items()}


def _maybe_float(tok: str):
    try:
        return float(tok)
    except ValueError:
        return tok

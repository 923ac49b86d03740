import math
from pathlib import Path

import numpy as np
import pytest

from plotkit import (
    SpecError,
    parse_spec,
    plot_diagram,
    plot_profiles,
    plot_surface_with_inset,
)
from plotkit.cli import main
from plotkit.specfile import read_csv_columns


def fmt(v):
    return "NA" if (isinstance(v, float) and math.isnan(v)) else f"{v:.17g}"


def write_profile(path: Path, x, rho, **extra):
    cols = {
        "x": x,
        "rho": rho,
        "rho_f": extra.get("rho_f", rho * 0.7),
        "rho_g": extra.get("rho_g", rho * 0.3),
        "xi_plus": extra.get("xi_plus", np.full_like(rho, 0.1)),
        "xi_minus": extra.get("xi_minus", np.full_like(rho, 0.1)),
        "xi_bar": extra.get("xi_bar", np.full_like(rho, 0.1)),
    }
    lines = [",".join(cols)]
    for i in range(len(x)):
        lines.append(",".join(fmt(cols[k][i]) for k in cols))
    path.write_text("\n".join(lines) + "\n")


def write_profile_2d(path: Path, n=20, dip=True):
    L = 10.0
    c = (np.arange(n) - n / 2 + 0.5) * (L / n)
    X1, X2 = np.meshgrid(c, c, indexing="ij")
    r = np.hypot(X1, X2)
    rho = np.exp(-((r - 1.0) ** 2)) + 0.2 if dip else np.exp(-(r**2)) + 0.2
    rho_f = np.exp(-(r**2)) + 0.2
    lines = ["x1,x2,rho,rho_f,rho_g,xi_bar"]
    for i in range(n):
        for j in range(n):
            vals = (c[i], c[j], rho[i, j], rho_f[i, j], rho[i, j] - rho_f[i, j], 0.1)
            lines.append(",".join(fmt(v) for v in vals))
    path.write_text("\n".join(lines) + "\n")


def write_table(path: Path, rows):
    lines = ["param,rho_dd,rho_g_dd,source"]
    for p, dd, ddg, src in rows:
        lines.append(f"{p},{dd},{ddg},{src}")
    path.write_text("\n".join(lines) + "\n")


@pytest.fixture
def profile_pair(tmp_path):
    x = (np.arange(100) - 50 + 0.5) * 0.1
    write_profile(tmp_path / "mc.csv", x, 1.0 + np.exp(-np.abs(x)))
    write_profile(tmp_path / "exks.csv", x, 1.0 + np.exp(-np.abs(x)) * 0.98)
    return tmp_path


class TestSpecParsing:
    def test_series_and_defaults(self, profile_pair):
        spec = parse_spec(
            "output=o.svg series.1.csv=mc.csv series.1.kind=mc "
            "series.2.csv=exks.csv series.2.kind=continuum series.2.label=model",
            base=profile_pair,
        )
        assert [s.kind for s in spec.series] == ["mc", "continuum"]
        assert spec.axis == "plain" and spec.column == "rho"

    def test_unknown_key_rejected(self):
        with pytest.raises(SpecError, match="unknown"):
            parse_spec("output=o.svg nonsense=1")

    def test_rescaled_requires_beta(self, profile_pair):
        with pytest.raises(SpecError, match="beta"):
            parse_spec("output=o.svg axis=rescaled series.1.csv=mc.csv", base=profile_pair)

    def test_missing_output(self):
        with pytest.raises(SpecError, match="output"):
            parse_spec("series.1.csv=x.csv")


class TestProfiles:
    def test_overlay_written(self, profile_pair):
        spec = parse_spec(
            "output=o.svg series.1.csv=mc.csv series.1.kind=mc "
            "series.2.csv=exks.csv series.2.kind=continuum",
            base=profile_pair,
        )
        out = plot_profiles(spec)
        text = out.read_text()
        assert out.suffix == ".svg" and len(text) > 1000
        # solid/dashed convention: a dashed stroke appears for the continuum line
        assert "stroke-dasharray" in text

    def test_rerender_is_byte_identical(self, profile_pair):
        text = (
            "output=o.svg series.1.csv=mc.csv series.1.kind=mc "
            "series.2.csv=exks.csv series.2.kind=continuum"
        )
        a = plot_profiles(parse_spec(text, base=profile_pair)).read_bytes()
        b = plot_profiles(parse_spec(text, base=profile_pair)).read_bytes()
        assert a == b

    def test_inputs_not_mutated(self, profile_pair):
        before = (profile_pair / "mc.csv").read_bytes()
        plot_profiles(parse_spec("output=o.svg series.1.csv=mc.csv", base=profile_pair))
        assert (profile_pair / "mc.csv").read_bytes() == before

    def test_rescaled_axis(self, profile_pair):
        spec = parse_spec(
            "output=o.svg axis=rescaled "
            "series.1.csv=mc.csv series.1.beta=1 "
            "series.2.csv=exks.csv series.2.beta=0.5 series.2.kind=continuum",
            base=profile_pair,
        )
        assert plot_profiles(spec).exists()

    def test_missing_file_rejected(self, tmp_path):
        spec = parse_spec("output=o.svg series.1.csv=nope.csv", base=tmp_path)
        with pytest.raises(SpecError, match="not found"):
            plot_profiles(spec)

    def test_schema_mismatch_rejected(self, tmp_path):
        (tmp_path / "bad.csv").write_text("a,b\n1,2\n")
        spec = parse_spec("output=o.svg series.1.csv=bad.csv", base=tmp_path)
        with pytest.raises(SpecError, match="expected columns"):
            plot_profiles(spec)

    def test_markers_drawn(self, profile_pair):
        spec = parse_spec(
            "output=o.svg markers=1.0,0.316 series.1.csv=mc.csv", base=profile_pair
        )
        assert plot_profiles(spec).exists()


class TestDiagram:
    def test_sign_change_diagram(self, tmp_path):
        write_table(
            tmp_path / "t.csv",
            [(0.0, -0.4, 0.0, "ExKS"), (0.1, 0.05, 0.3, "ExKS"), (0.3, 0.9, 1.3, "ExKS"),
             (0.0, -0.5, 0.0, "MC"), (0.3, 0.93, 1.23, "MC")],
        )
        spec = parse_spec("output=d.svg table=t.csv", base=tmp_path)
        out = plot_diagram(spec)
        assert out.exists()

    def test_empty_table_no_image(self, tmp_path):
        write_table(tmp_path / "t.csv", [])
        spec = parse_spec("output=d.svg table=t.csv", base=tmp_path)
        with pytest.raises(SpecError, match="empty"):
            plot_diagram(spec)
        assert not (tmp_path / "d.svg").exists()


class TestSurface:
    def test_surface_with_inset(self, tmp_path):
        write_profile_2d(tmp_path / "f.csv")
        spec = parse_spec(
            "output=s.svg csv=f.csv slice_value=0.0 slice_axis=0", base=tmp_path
        )
        assert plot_surface_with_inset(spec).exists()

    def test_uniform_field(self, tmp_path):
        n = 10
        c = (np.arange(n) - n / 2 + 0.5)
        lines = ["x1,x2,rho,rho_f,rho_g,xi_bar"]
        for i in range(n):
            for j in range(n):
                lines.append(f"{c[i]},{c[j]},1.0,0.7,0.3,0.1")
        (tmp_path / "u.csv").write_text("\n".join(lines) + "\n")
        spec = parse_spec("output=s.svg csv=u.csv slice_value=0.0", base=tmp_path)
        assert plot_surface_with_inset(spec).exists()

    def test_off_lattice_slice_rejected(self, tmp_path):
        write_profile_2d(tmp_path / "f.csv")
        spec = parse_spec("output=s.svg csv=f.csv slice_value=99.0", base=tmp_path)
        with pytest.raises(SpecError, match="off-lattice"):
            plot_surface_with_inset(spec)


class TestCli:
    def test_profiles_command(self, profile_pair, capsys):
        spec = profile_pair / "p.spec"
        spec.write_text("output=o.svg series.1.csv=mc.csv\n")
        assert main(["profiles", "--spec", str(spec)]) == 0
        assert (profile_pair / "o.svg").exists()

    def test_bad_spec_exit_code(self, tmp_path):
        spec = tmp_path / "p.spec"
        spec.write_text("output=o.svg wat=1\n")
        assert main(["profiles", "--spec", str(spec)]) == 2

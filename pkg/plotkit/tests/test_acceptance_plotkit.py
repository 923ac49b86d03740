"""Secondary acceptance: regenerate figure-style images from the CSVs the
primary acceptance suite leaves in ``artifacts/acceptance``.

Run the primary suite first (``pytest`` at the repository root); these tests
skip when the artifact CSVs are absent.
"""

from pathlib import Path

import pytest

from plotkit import parse_spec, plot_diagram, plot_profiles

ARTIFACTS = Path(__file__).resolve().parents[2] / "artifacts" / "acceptance"


def _need(*names):
    missing = [n for n in names if not (ARTIFACTS / n).exists()]
    if missing:
        pytest.skip(f"primary acceptance artifacts missing: {', '.join(missing)}")


def test_criterion_13_overlay_and_diagram(tmp_path):
    _need("fig1b_mc_beta1.csv", "fig1b_exks_beta1.csv", "fig1b_exks_beta0.1.csv",
          "fig3b_bimodality.csv")

    overlay_spec = parse_spec(
        "output={out} "
        "series.1.csv={a} series.1.kind=mc series.1.label=MC_beta=1 "
        "series.2.csv={b} series.2.kind=continuum series.2.label=ExKS_beta=1 "
        "series.3.csv={c} series.3.kind=continuum series.3.label=ExKS_beta=0.1".format(
            out=tmp_path / "fig1b_style.svg",
            a=ARTIFACTS / "fig1b_mc_beta1.csv",
            b=ARTIFACTS / "fig1b_exks_beta1.csv",
            c=ARTIFACTS / "fig1b_exks_beta0.1.csv",
        )
    )
    out = plot_profiles(overlay_spec)
    text = out.read_text()
    assert len(text) > 1000
    assert "stroke-dasharray" in text  # continuum series dashed per convention

    diagram_spec = parse_spec(
        f"output={tmp_path/'fig3b_style.svg'} table={ARTIFACTS/'fig3b_bimodality.csv'}"
    )
    out2 = plot_diagram(diagram_spec)
    assert out2.exists() and out2.stat().st_size > 1000

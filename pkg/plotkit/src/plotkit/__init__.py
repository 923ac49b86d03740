"""Figure rendering for chemotaxis simulation CSV outputs."""

__version__ = "0.1.0"

from .plots import plot_diagram, plot_profiles, plot_surface_with_inset
from .specfile import PlotSpec, Series, SpecError, parse_spec, parse_spec_file

__all__ = [
    "__version__",
    "PlotSpec",
    "Series",
    "SpecError",
    "parse_spec",
    "parse_spec_file",
    "plot_diagram",
    "plot_profiles",
    "plot_surface_with_inset",
]

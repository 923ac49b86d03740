"""Command-line front end: ``plot profiles|diagram|surface --spec <file>``.

The spec file uses the same flat key=value format as the simulation configs;
see :mod:`plotkit.specfile` for the recognized keys per plot type.
Exit codes: 0 success, 2 bad spec or inputs.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .plots import plot_diagram, plot_profiles, plot_surface_with_inset
from .specfile import SpecError, parse_spec_file

_COMMANDS = {
    "profiles": plot_profiles,
    "diagram": plot_diagram,
    "surface": plot_surface_with_inset,
}


def main(argv: list[str] | None = None) -> int:
    ap = argparse.ArgumentParser(prog="plot", description=__doc__.split("\n\n")[0])
    ap.add_argument("kind", choices=sorted(_COMMANDS))
    ap.add_argument("--spec", type=Path, required=True)
    args = ap.parse_args(argv)
    try:
        spec = parse_spec_file(args.spec)
        out = _COMMANDS[args.kind](spec)
        print(out)
        return 0
    except (SpecError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

"""Figure rendering for the oscillator-array simulator's CSV/JSON outputs."""

from .render import render
from .spec import FigureSpec, SpecError, load_spec, orbit_colors

__version__ = "0.1.0"

__all__ = ["FigureSpec", "SpecError", "load_spec", "orbit_colors", "render", "__version__"]

"""Figure specifications: a small JSON schema naming inputs and styling.

A spec file looks like::

    {
      "kind": "trajectory",
      "inputs": {"data": "runs/fig2-ferro/trajectory.csv"},
      "title": "...", "xlabel": "...", "ylabel": "...",
      "xlim": [0, 100], "ylim": [0, 1],
      "colors": {"000": "black"}
    }

Input paths are resolved relative to the spec file's directory.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

KINDS = ("trajectory", "spectrum", "heatmap", "signmap", "surface")


class SpecError(ValueError):
    """Invalid or unreadable figure specification or input data."""


# Orbit color coding used in the figure captions. Tripling labels use
# digits {0,1,2}; doubling labels use {0,1} only, where the four-site
# classes reuse black/blue/red/green in configuration order.
TRIPLING_COLORS = {
    "0": "black",
    "00": "black",
    "01": "blue",
    "000": "black",
    "001": "blue",
    "002": "red",
    "012": "green",
    "0000": "black",
    "0001": "blue",
    "0002": "red",
    "0011": "green",
    "0012": "gold",
    "0101": "purple",
    "0102": "orange",
}
DOUBLING_COLORS = {
    "0": "black",
    "1": "blue",
    "00": "black",
    "01": "blue",
    "000": "black",
    "001": "blue",
    "0000": "black",
    "0001": "blue",
    "0011": "red",
    "0101": "green",
}


def orbit_colors(labels) -> dict:
    """Caption color map for a set of orbit labels.

    The drive order is inferred from the labels: any digit 2 means period
    tripling; otherwise labels with more than two sites are read as period
    doubling (two-site labels are unambiguous).
    """
    labels = list(labels)
    tripling = any("2" in lab for lab in labels) or all(len(lab) <= 2 for lab in labels)
    table = TRIPLING_COLORS if tripling else DOUBLING_COLORS
    fallback = ["brown", "teal", "magenta", "olive", "navy", "gray"]
    out = {}
    i = 0
    for lab in labels:
        if lab in table:
            out[lab] = table[lab]
        else:
            out[lab] = fallback[i % len(fallback)]
            i += 1
    return out


@dataclass(frozen=True)
class FigureSpec:
    kind: str
    inputs: dict  # name -> resolved Path
    title: str = ""
    xlabel: str = ""
    ylabel: str = ""
    xlim: tuple = None
    ylim: tuple = None
    colors: dict = field(default_factory=dict)
    options: dict = field(default_factory=dict)


def load_spec(path) -> FigureSpec:
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except FileNotFoundError as exc:
        raise SpecError(f"spec file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise SpecError(f"spec file is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise SpecError("spec must be a JSON object")

    kind = raw.get("kind")
    if kind not in KINDS:
        raise SpecError(f"kind must be one of {KINDS}, got {kind!r}")
    inputs = raw.get("inputs")
    if not isinstance(inputs, dict) or not inputs:
        raise SpecError("inputs must be a non-empty object of name -> path")
    resolved = {}
    for name, rel in inputs.items():
        p = (path.parent / rel).resolve() if not Path(rel).is_absolute() else Path(rel)
        if not p.is_file():
            raise SpecError(f"input {name!r} does not exist: {p}")
        resolved[name] = p

    def pair(key):
        v = raw.get(key)
        if v is None:
            return None
        if not (isinstance(v, (list, tuple)) and len(v) == 2):
            raise SpecError(f"{key} must be a [low, high] pair")
        return (float(v[0]), float(v[1]))

    return FigureSpec(
        kind=kind,
        inputs=resolved,
        title=str(raw.get("title", "")),
        xlabel=str(raw.get("xlabel", "")),
        ylabel=str(raw.get("ylabel", "")),
        xlim=pair("xlim"),
        ylim=pair("ylim"),
        colors=dict(raw.get("colors", {})),
        options=dict(raw.get("options", {})),
    )

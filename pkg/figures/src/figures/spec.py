"""Figure specifications loaded from small JSON files.

A spec names an input CSV, a figure kind, and an output image path,
plus optional cosmetics (title, labels, limits) and kind-specific
parameters such as the step height used for contour levels.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path


class SpecError(Exception):
    """Raised when a figure spec is missing, malformed, or incomplete."""


_KNOWN_KEYS = {
    "kind",
    "input",
    "output",
    "title",
    "xlabel",
    "ylabel",
    "xlim",
    "ylim",
    "step_height",
    "mean_slope",
    "dpi",
}


@dataclass(frozen=True)
class FigureSpec:
    kind: str
    input: Path
    output: Path
    title: str | None = None
    xlabel: str | None = None
    ylabel: str | None = None
    xlim: tuple[float, float] | None = None
    ylim: tuple[float, float] | None = None
    # contour-steps: height quantum defining the contour levels
    step_height: float = 1.0
    # height kinds: (B1, B2) ramp added to the stored values
    mean_slope: tuple[float, float] | None = None
    dpi: int = 150


def _pair(raw, key: str) -> tuple[float, float]:
    try:
        a, b = raw
        return (float(a), float(b))
    except (TypeError, ValueError) as exc:
        raise SpecError(f"'{key}' must be a pair of numbers, got {raw!r}") from exc


def load_spec(path: str | Path) -> FigureSpec:
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except FileNotFoundError as exc:
        raise SpecError(f"spec file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise SpecError(f"invalid JSON in {path}: line {exc.lineno}: {exc.msg}") from exc
    if not isinstance(raw, dict):
        raise SpecError(f"{path}: top level must be a JSON object")

    unknown = sorted(set(raw) - _KNOWN_KEYS)
    if unknown:
        raise SpecError(f"{path}: unknown keys {unknown}; known keys are {sorted(_KNOWN_KEYS)}")
    for key in ("kind", "input", "output"):
        if key not in raw:
            raise SpecError(f"{path}: missing required key '{key}'")

    # relative paths in the spec resolve against the spec's directory
    base = path.parent
    kwargs = {
        "kind": str(raw["kind"]),
        "input": base / str(raw["input"]),
        "output": base / str(raw["output"]),
    }
    for key in ("title", "xlabel", "ylabel"):
        if key in raw:
            kwargs[key] = str(raw[key])
    for key in ("xlim", "ylim", "mean_slope"):
        if key in raw:
            kwargs[key] = _pair(raw[key], key)
    if "step_height" in raw:
        try:
            kwargs["step_height"] = float(raw["step_height"])
        except (TypeError, ValueError) as exc:
            raise SpecError(f"{path}: 'step_height' must be a number") from exc
        if kwargs["step_height"] <= 0:
            raise SpecError(f"{path}: 'step_height' must be positive")
    if "dpi" in raw:
        kwargs["dpi"] = int(raw["dpi"])
    return FigureSpec(**kwargs)

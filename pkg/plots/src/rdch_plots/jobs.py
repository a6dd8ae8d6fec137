"""Plot job description shared by the renderers and the CLI."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

KINDS = ("timeseries", "fields", "sweep")


@dataclass(frozen=True)
class PlotJob:
    input_dir: Path
    kind: str
    output: Path
    dpi: int = 120
    figsize: tuple[float, float] = (9.0, 6.0)

    def __post_init__(self):
        object.__setattr__(self, "input_dir", Path(self.input_dir))
        object.__setattr__(self, "output", Path(self.output))
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}")
        if self.dpi <= 0:
            raise ValueError("dpi must be positive")

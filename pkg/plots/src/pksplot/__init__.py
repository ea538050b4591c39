"""Post-processing figures for simulator records files.

Submodules: records (strict CSV parsing), figures (decay and comparison
rendering), cli (the pks-plot entry point).
"""

from .figures import PlotSpec, fit_rate, render_comparison_report, render_decay_plot
from .records import read_records

__version__ = "0.1.0"

__all__ = [
    "PlotSpec",
    "fit_rate",
    "read_records",
    "render_comparison_report",
    "render_decay_plot",
]

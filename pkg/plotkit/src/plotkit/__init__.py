"""plotkit: batch figure rendering for attitude-control experiment outputs.

Consumes the simulator's trajectory CSVs and study reports (pareto.csv,
tunings.csv, JSON metadata) and renders the four standard figures:
pareto, trajectories, decay, montecarlo.
"""

from .figures import FIGURES, FigureSpec, render
from .schemas import SchemaError

__version__ = "0.1.0"
__all__ = ["FigureSpec", "render", "FIGURES", "SchemaError"]

"""Toolkit for measuring how disruptive and consolidating AI patents reach job tasks.

The pipeline classifies patents with a citation-based disruption index,
matches occupational task descriptions to patent abstracts by embedding
similarity, labels each task's AI exposure, and computes the downstream
statistics: shuffle null-model z-scores, industry and state proportion
deltas, sectoral exposure ratios, and vacancy-rate correlations.
"""

__version__ = "0.1.0"

from .errors import ConfigError, DataError, PipelineError

__all__ = ["ConfigError", "DataError", "PipelineError", "__version__"]

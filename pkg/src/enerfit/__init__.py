"""Building-energy decision support: ingestion, MLP training with HPO,
evaluation, and an inference service for retrofit and PV planning."""

__version__ = "0.1.0"

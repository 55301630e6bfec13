"""gridsiter: reliability-gated, market-driven siting of large flexible loads."""

__version__ = "0.1.0"

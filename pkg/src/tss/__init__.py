"""Global time-series summaries by greedy utility/diversity selection."""

__version__ = "0.1.0"

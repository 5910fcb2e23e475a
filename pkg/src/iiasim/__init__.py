"""Reenactment of iterative impact analysis with propagation and TopN termination heuristics."""

__version__ = "0.1.0"

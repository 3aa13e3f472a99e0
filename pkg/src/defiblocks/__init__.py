"""
defiblocks - Batch analytics for DeFi compositions in Ethereum transaction traces.

This package reconstructs transaction trace trees, builds code-account and
protocol interaction networks, evaluates their topology and community
structure, and extracts nested protocol building blocks with canonical hashes.
"""

from defiblocks.version import __version__

__all__ = ["__version__"]

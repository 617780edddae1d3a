"""Entropy invariants and uniqueness criteria for shift-invariant Gibbs
structures on free groups, with finite permutation models at desk scale."""

__version__ = "0.1.0"

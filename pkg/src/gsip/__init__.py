"""Polynomial GSIPs with polyhedral parameter sets via disjunctive KKT relaxations."""

__version__ = "0.1.0"

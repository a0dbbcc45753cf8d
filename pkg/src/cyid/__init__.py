"""Exact verification of binomial-sum, constant-term, and recurrence identities."""

__version__ = "0.1.0"

"""Simulator for a feedback-verified direct-communication qubit channel."""

__version__ = "0.1.0"

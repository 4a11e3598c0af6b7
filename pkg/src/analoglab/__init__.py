"""Desk-scale experiments on analogue machines and non-computable waiting times."""

__version__ = "0.1.0"

"""Certified bounds for the Kobayashi metric near the boundary of domains in C^n."""

__version__ = "0.1.0"

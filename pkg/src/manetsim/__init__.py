"""Discrete-event MANET simulator: OLSR, RWP/RD/steady-state mobility, CBR/VBR traffic."""

__version__ = "0.1.0"

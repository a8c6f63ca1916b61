"""Single-trapped-ion parity-violation light-shift simulator."""

__version__ = "0.1.0"

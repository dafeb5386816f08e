"""Mode selection, power control and spectrum allocation for D2D links
underlaying a macro/femto network."""

__version__ = "0.1.0"

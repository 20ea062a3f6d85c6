"""Draw-uncertainty simulations for the old and new Champions League designs."""

__version__ = "0.1.0"

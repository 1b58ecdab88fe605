"""CTL and Datalog: translations, evaluation and bounded decision procedures."""

__version__ = "0.1.0"

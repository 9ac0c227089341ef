"""Classical simulator for QSVT-based Renyi entropy estimation."""

__version__ = "0.1.0"

"""Simulation and boundedness certification for second-order self-propelled swarms."""

__version__ = "0.1.0"

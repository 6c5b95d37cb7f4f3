"""Modular and weak values measured in polar form with a quantum-eraser qubit meter."""

__version__ = "0.1.0"

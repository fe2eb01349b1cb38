"""Two-qubit Heisenberg-Ising gates from half-sine pulses via Bell-basis SU(2) blocks."""

__version__ = "0.1.0"

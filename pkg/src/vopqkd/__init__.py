"""vopqkd - Quantum key distribution with vacuum-one-photon qubits."""

__version__ = "0.1.0"

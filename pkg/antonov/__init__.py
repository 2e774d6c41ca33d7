"""Plane-symmetric Vlasov-Poisson steady states and the spectral theory of their linearization."""

__version__ = "0.1.0"

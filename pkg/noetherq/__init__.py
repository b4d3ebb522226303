"""Conserved charges of time-dependent Lagrangians, their lift to parametrized form and their quantization."""

"""Computations in the graph Γ-monoid of a finite graph."""

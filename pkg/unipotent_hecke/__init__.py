"""Exact combinatorics of unipotent affine Hecke algebras and their dual-side comparison."""

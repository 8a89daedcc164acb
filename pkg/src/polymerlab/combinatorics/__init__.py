"""Lattice paths and the surgery that turns path tuples into non-intersecting corner tuples."""

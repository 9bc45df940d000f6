"""Random polytope lab command modules."""

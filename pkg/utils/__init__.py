"""Random polytope lab utility modules."""
